#pragma once

// Per-sample residual records and their pass/fail summary.

#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicekit/expr.hpp"

namespace slicekit {

/// An operation's hypothesis does not hold (as opposed to a failed check).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampleRecord {
  Vector point;
  double residual = 0.0;
  std::string error;  // non-empty when the sample could not be evaluated
};

struct CheckReport {
  static constexpr std::size_t kMaxOffending = 10;

  std::string check;
  std::string system;
  std::string citation;
  double tolerance = 1e-8;
  std::vector<SampleRecord> samples;
  double max = 0.0;
  double mean = 0.0;
  bool pass = true;
  std::vector<std::size_t> offending;
  std::vector<std::string> notes;
  std::map<std::string, double> metrics;

  void add(Vector point, double residual) { samples.push_back({std::move(point), residual, {}}); }
  void add_failure(Vector point, std::string error);

  /// Recomputes max, mean, verdict and the offending list. Failed samples
  /// count as infinite residuals, so the verdict is pass iff max <= tolerance.
  CheckReport& finalize();
};

/// Stable JSON text: {check, system, tolerance, samples:[{point, residual}], max,
/// mean, verdict, citation, ...}.
std::string to_json_string(const CheckReport& report, int indent = 2);
void write_text(std::ostream& out, const CheckReport& report);
/// One row per sample: residual then point coordinates.
void write_csv(std::ostream& out, const CheckReport& report);

/// Shortest round-trip decimal, "." separator, independent of locale.
std::string format_real(double v);

}  // namespace slicekit
