#pragma once

// Report streams in text, json or csv.

#include <ostream>
#include <string>
#include <vector>

#include "slicekit/corpus.hpp"

namespace slicekit {

enum class OutputFormat { text, json, csv };

/// "text", "json" or "csv"; throws std::invalid_argument otherwise.
OutputFormat parse_format(const std::string& name);

/// One report as its own document; several as a json array, consecutive
/// text blocks, or a csv summary table (one row per report).
void write_reports(std::ostream& out, const std::vector<CheckReport>& reports, OutputFormat format);

/// Per-check rows with expected and observed verdicts.
void write_corpus_results(std::ostream& out, const std::vector<EntryResult>& results, OutputFormat format);

void write_trajectory(std::ostream& out, const Trajectory& trajectory, const CoordinateSpace& space,
                      OutputFormat format);

}  // namespace slicekit
