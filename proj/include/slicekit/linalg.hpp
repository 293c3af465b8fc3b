#pragma once

// Small dense linear-algebra helpers shared by the checks.

#include <stdexcept>
#include <string>

#include "slicekit/expr.hpp"

namespace slicekit {

class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(const std::string& what, double measure) : std::runtime_error(what), measure_(measure) {}
  /// Relative determinant or condition number, depending on the caller.
  double measure() const noexcept { return measure_; }

 private:
  double measure_;
};

inline constexpr double kRankTolerance = 1e-10;

/// Inverse by LU with partial pivoting; throws when |det| <= 1e-12 relative
/// to the product of row norms.
Matrix checked_inverse(const Matrix& a, const std::string& what);

/// Numerical rank with threshold kRankTolerance * sigma_max.
Eigen::Index numerical_rank(const Matrix& a, double relative_tolerance = kRankTolerance);

/// Orthonormal basis (columns) of the column space of a.
Matrix range_basis(const Matrix& a, double relative_tolerance = kRankTolerance);

/// Orthonormal basis (columns) of ker a.
Matrix null_space(const Matrix& a, double relative_tolerance = kRankTolerance);

/// sigma_max / sigma_min (infinity when singular).
double condition_number(const Matrix& a);

/// Largest principal-angle sine between span(a) and span(b) (orthonormal
/// bases). 1 when dimensions differ; 0 when both are trivial.
double subspace_distance(const Matrix& a, const Matrix& b);

/// Intersection of the column spans of a and b, as an orthonormal basis.
Matrix subspace_intersection(const Matrix& a, const Matrix& b, double relative_tolerance = kRankTolerance);

struct LeastSquares {
  Vector solution;
  double residual = 0.0;
  Eigen::Index rank = 0;
  bool full_column_rank = false;
};

/// min_v |a v - b| via SVD with the rank threshold above.
LeastSquares least_squares(const Matrix& a, const Vector& b);

}  // namespace slicekit
