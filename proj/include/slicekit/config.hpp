#pragma once

// System-definition files. Line-oriented:
//
//   # comment
//   [space P]
//   coords = z1; z2
//   bounds = -2 2; -2 2
//   constraints = z1^2 + z2^2 > 0
//
// Section kinds: space, system, symplectic, poisson, map, slicing, complete,
// fibration, sode, check. Lists use ";", matrix rows "|". Unknown kinds or
// keys are errors.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slicekit/dynamics.hpp"
#include "slicekit/poisson.hpp"
#include "slicekit/slicing.hpp"
#include "slicekit/sode.hpp"
#include "slicekit/symplectic.hpp"

namespace slicekit {

/// Malformed or inconsistent definition (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigSection {
  std::string kind;
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line = 0;
};

/// Syntax only: sections, keys and raw values.
std::vector<ConfigSection> parse_sections(std::string_view text);
std::string write_sections(const std::vector<ConfigSection>& sections);

struct CheckSpec {
  std::string name;
  std::string op;
  std::map<std::string, std::string> args;
  std::optional<bool> expect;
  std::string citation;
};

struct SodeDefinition {
  TangentBundleSpace bundle;
  std::vector<Expression> functions;
};

class Definition {
 public:
  static Definition parse(std::string_view text);
  static Definition load_file(const std::string& path);

  /// Canonical text rebuilt from the constructed objects.
  std::string serialize() const;

  SpaceRef space(const std::string& name) const;
  const SmoothMap& map(const std::string& name) const;
  const Slicing& slicing(const std::string& name) const;
  const CompleteSlicing& complete(const std::string& name) const;
  const FibredStructure& fibration(const std::string& name) const;
  const SymplecticSystem& symplectic(const std::string& name) const;
  const PoissonSystem& poisson(const std::string& name) const;
  const SodeDefinition& sode(const std::string& name) const;
  /// Any of system, symplectic, poisson or sode.
  DynamicalSystem dynamics(const std::string& name) const;
  bool has_symplectic(const std::string& name) const { return symplectic_.count(name) != 0; }
  bool has_poisson(const std::string& name) const { return poisson_.count(name) != 0; }

  const std::vector<CheckSpec>& checks() const noexcept { return checks_; }
  const CheckSpec& check(const std::string& name) const;

 private:
  void add(const ConfigSection& section);

  std::vector<std::pair<std::string, std::string>> order_;  // (kind, name)
  std::map<std::string, std::shared_ptr<CoordinateSpace>> spaces_;
  std::map<std::string, DynamicalSystem> systems_;
  std::map<std::string, SymplecticSystem> symplectic_;
  std::map<std::string, PoissonSystem> poisson_;
  std::map<std::string, SmoothMap> maps_;
  std::map<std::string, Slicing> slicings_;
  std::map<std::string, CompleteSlicing> completes_;
  std::map<std::string, FibredStructure> fibrations_;
  std::map<std::string, SodeDefinition> sodes_;
  std::vector<CheckSpec> checks_;
};

/// Splits on `sep` and trims; empty input gives an empty list.
std::vector<std::string> split_list(std::string_view text, char sep = ';');
/// "lo hi; lo hi"; each bound is a constant expression without spaces
/// outside parentheses.
std::vector<Interval> parse_bounds(std::string_view text);
/// A constant expression such as "2*atan2(0, -1)".
double parse_real(std::string_view text);

}  // namespace slicekit
