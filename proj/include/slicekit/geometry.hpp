#pragma once

// Single-chart coordinate spaces and the maps, vector fields and two-tensors
// living on them.

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slicekit/expr.hpp"

namespace slicekit {

/// A point was used outside the open region of its space.
class OutOfDomain : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Strict inequality `expression > 0` on the coordinates of a space.
struct DomainConstraint {
  Expression positive;
  std::string text;
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

class CoordinateSpace {
 public:
  static constexpr double kDomainMargin = 1e-12;

  CoordinateSpace(std::string name, std::vector<std::string> coordinates);

  const std::string& name() const noexcept { return name_; }
  Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(coords_.size()); }
  const std::vector<std::string>& coordinates() const noexcept { return coords_; }
  std::optional<std::size_t> index_of(const std::string& coordinate) const;

  void set_period(std::size_t i, double period);
  const std::optional<double>& period(std::size_t i) const { return periods_.at(i); }
  bool has_periodic() const;

  /// Accepts "lhs > rhs" or "lhs < rhs".
  void add_constraint(const std::string& inequality);
  const std::vector<DomainConstraint>& constraints() const noexcept { return constraints_; }

  void set_bounds(std::vector<Interval> bounds);
  const std::vector<Interval>& bounds() const noexcept { return bounds_; }

  /// True when every constraint exceeds the margin; evaluation failures count as outside.
  bool contains(const Vector& x) const;
  /// Periodic coordinates wrapped into [0, period).
  Vector canonicalize(Vector x) const;
  /// a - b with periodic components reduced to [-period/2, period/2).
  Vector difference(const Vector& a, const Vector& b) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<std::optional<double>> periods_;
  std::vector<DomainConstraint> constraints_;
  std::vector<Interval> bounds_;
};

using SpaceRef = std::shared_ptr<const CoordinateSpace>;

/// Coordinates of M followed by those of N, with constraints and periods carried over.
SpaceRef product_space(std::string name, const CoordinateSpace& m, const CoordinateSpace& n);

/// Validated point: inside the domain, periodic coordinates canonical.
struct Point {
  SpaceRef space;
  Vector coords;

  static Point make(SpaceRef space, Vector coords);
};

void require_in_domain(const CoordinateSpace& space, const Vector& x);

enum class DiffMode { automatic, dual, finite_difference };

using NumericFunction = std::function<Vector(const Vector&)>;

/// Map between coordinate spaces, either by component expressions (exactly
/// differentiable) or by a numeric callable (finite differences only).
class SmoothMap {
 public:
  SmoothMap(std::string name, SpaceRef source, SpaceRef target, std::vector<Expression> components);
  SmoothMap(std::string name, SpaceRef source, SpaceRef target, NumericFunction function);

  static SmoothMap parse(std::string name, SpaceRef source, SpaceRef target, const std::vector<std::string>& texts);
  static SmoothMap identity(const SpaceRef& space);

  const std::string& name() const noexcept { return name_; }
  const SpaceRef& source() const noexcept { return source_; }
  const SpaceRef& target() const noexcept { return target_; }
  bool has_expressions() const noexcept { return !function_; }
  const std::vector<Expression>& components() const noexcept { return components_; }

  Vector operator()(const Vector& x) const;

  /// Same components with trailing source coordinates frozen at `values`;
  /// the result is defined on `source`.
  SmoothMap fix_trailing(const SpaceRef& source, const Vector& values) const;

 private:
  std::string name_;
  SpaceRef source_;
  SpaceRef target_;
  std::vector<Expression> components_;
  NumericFunction function_;
};

class VectorField {
 public:
  VectorField(std::string name, SpaceRef space, std::vector<Expression> components);
  VectorField(std::string name, SpaceRef space, NumericFunction function);

  static VectorField parse(std::string name, SpaceRef space, const std::vector<std::string>& texts);
  static VectorField zero(const SpaceRef& space);

  const std::string& name() const noexcept { return name_; }
  const SpaceRef& space() const noexcept { return space_; }
  bool has_expressions() const noexcept { return !function_; }
  const std::vector<Expression>& components() const noexcept { return components_; }

  Vector operator()(const Vector& x) const;

 private:
  std::string name_;
  SpaceRef space_;
  std::vector<Expression> components_;
  NumericFunction function_;
};

enum class FormKind { symplectic, poisson };

/// Point-dependent square matrix of expressions: a two-form (omega_kl) or a
/// bivector (Lambda^kl).
class BilinearFormField {
 public:
  BilinearFormField(std::string name, SpaceRef space, FormKind kind, std::vector<Expression> entries);

  static BilinearFormField parse(std::string name, SpaceRef space, FormKind kind,
                                 const std::vector<std::vector<std::string>>& rows);
  /// dq^i ^ dp_i. `interleaved` orders coordinates (q1, p1, q2, p2, ...),
  /// otherwise (q1..qn, p1..pn).
  static BilinearFormField canonical(const SpaceRef& space, bool interleaved = false);

  const std::string& name() const noexcept { return name_; }
  const SpaceRef& space() const noexcept { return space_; }
  FormKind kind() const noexcept { return kind_; }
  Eigen::Index size() const noexcept { return n_; }
  const Expression& entry(Eigen::Index i, Eigen::Index j) const { return entries_[static_cast<std::size_t>(i * n_ + j)]; }
  bool constant_coefficients() const;

  Matrix operator()(const Vector& x) const;

  template <typename T>
  T entry_value(Eigen::Index i, Eigen::Index j, std::span<const T> x) const {
    return entry(i, j).template eval<T>(x);
  }

  /// max |A + A^T| at x.
  double skew_defect(const Vector& x) const;

 private:
  std::string name_;
  SpaceRef space_;
  FormKind kind_;
  Eigen::Index n_;
  std::vector<Expression> entries_;
};

/// Entry (k, i) = d a^k / d x^i at x.
Matrix jacobian(const SmoothMap& f, const Vector& x, DiffMode mode = DiffMode::automatic);
/// Central differences with h_i = 1e-5 * max(1, |x_i|).
Matrix finite_difference_jacobian(const NumericFunction& f, const Vector& x, Eigen::Index rows);

Vector pushforward(const SmoothMap& f, const Vector& x, const Vector& v, DiffMode mode = DiffMode::automatic);

/// J^T * Omega(alpha(x)) * J.
Matrix pullback_two_form(const SmoothMap& alpha, const BilinearFormField& omega, const Vector& x,
                         DiffMode mode = DiffMode::automatic);

struct PullbackValue {
  double value = 0.0;
  Vector differential;
};

/// H(alpha(x)) and d(alpha^* H)(x) = J^T grad H(alpha(x)).
PullbackValue pullback_function(const SmoothMap& alpha, const Expression& h, const Vector& x,
                                DiffMode mode = DiffMode::automatic);

/// g o f. Expression-backed when both are.
SmoothMap compose(const SmoothMap& g, const SmoothMap& f, std::string name = {});

}  // namespace slicekit
