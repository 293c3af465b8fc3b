#pragma once

// Named operations over a Definition. Each maps onto one library check.

#include <cstdint>
#include <string>
#include <vector>

#include "slicekit/config.hpp"

namespace slicekit {

struct OperationInfo {
  std::string name;
  std::string summary;
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

/// Every operation, sorted by name. Each also accepts tolerance, samples,
/// seed, strategy (random|grid) and bounds.
const std::vector<OperationInfo>& operations();
const OperationInfo& operation(const std::string& name);

/// Throws ConfigError for an unknown op, a missing required argument or an
/// unexpected one.
void validate_check(const CheckSpec& spec);

struct RunOptions {
  double tolerance = 1e-8;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
};

/// Runs one check. Arguments in the spec override `options`. A failed
/// precondition yields a failing report with a note; definition problems
/// throw ConfigError.
CheckReport run_check(const Definition& def, const CheckSpec& spec, const RunOptions& options = {});

struct CheckOutcome {
  CheckSpec spec;
  CheckReport report;
  /// Verdict equals the expectation (or passes, without one).
  bool matched = false;
};

CheckOutcome run_expected(const Definition& def, const CheckSpec& spec, const RunOptions& options = {});

}  // namespace slicekit
