#pragma once

// Built-in worked examples, each a definition with expected verdicts.

#include <string>
#include <vector>

#include "slicekit/runner.hpp"

namespace slicekit {

struct CorpusEntry {
  std::string id;
  std::string summary;
  std::string source;  // definition text in the config format
};

/// All entries in registry order.
const std::vector<CorpusEntry>& corpus_entries();
/// Throws std::out_of_range for an unknown id.
const CorpusEntry& corpus_entry(const std::string& id);
Definition load_corpus(const std::string& id);

struct EntryResult {
  std::string id;
  std::vector<CheckOutcome> outcomes;
  bool all_matched = true;
};

/// Runs every check of the entry, in file order.
EntryResult run_corpus_entry(const std::string& id, const RunOptions& options = {});

}  // namespace slicekit
