#include "slicekit/linalg.hpp"

#include <cmath>
#include <limits>

namespace slicekit {

namespace {

Eigen::Index rank_from(const Vector& sv, double relative_tolerance) {
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  const double threshold = relative_tolerance * sv[0];
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] > threshold) ++r;
  return r;
}

}  // namespace

Matrix checked_inverse(const Matrix& a, const std::string& what) {
  if (a.rows() != a.cols()) throw std::invalid_argument(what + ": matrix is not square");
  if (a.rows() == 0) return a;
  const Eigen::PartialPivLU<Matrix> lu(a);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) scale *= a.row(i).norm();
  const double rel = scale > 0.0 ? std::abs(lu.determinant()) / scale : 0.0;
  if (!(rel > 1e-12)) throw SingularMatrix(what + " is singular (relative determinant " + std::to_string(rel) + ")", rel);
  return lu.inverse();
}

Eigen::Index numerical_rank(const Matrix& a, double relative_tolerance) {
  if (a.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(a);
  return rank_from(svd.singularValues(), relative_tolerance);
}

Matrix range_basis(const Matrix& a, double relative_tolerance) {
  if (a.size() == 0) return Matrix(a.rows(), 0);
  const Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const auto r = rank_from(svd.singularValues(), relative_tolerance);
  return svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& a, double relative_tolerance) {
  if (a.rows() == 0) return Matrix::Identity(a.cols(), a.cols());
  const Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto r = rank_from(svd.singularValues(), relative_tolerance);
  return svd.matrixV().rightCols(a.cols() - r);
}

double condition_number(const Matrix& a) {
  const Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smin = sv[sv.size() - 1];
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

double subspace_distance(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  const Matrix pa = a - b * (b.transpose() * a);
  const Matrix pb = b - a * (a.transpose() * b);
  const double da = Eigen::JacobiSVD<Matrix>(pa).singularValues()[0];
  const double db = Eigen::JacobiSVD<Matrix>(pb).singularValues()[0];
  return std::min(1.0, std::max(da, db));
}

Matrix subspace_intersection(const Matrix& a, const Matrix& b, double relative_tolerance) {
  const Matrix qa = range_basis(a, relative_tolerance);
  const Matrix qb = range_basis(b, relative_tolerance);
  if (qa.cols() == 0 || qb.cols() == 0) return Matrix(a.rows(), 0);
  // qa x = qb y  <=>  [qa, -qb] (x; y) = 0; both bases orthonormal so the
  // singular values of [qa, -qb] are bounded by sqrt(2).
  Matrix stacked(a.rows(), qa.cols() + qb.cols());
  stacked << qa, -qb;
  const Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Eigen::Index r = 0;
  const double threshold = 1e-8 * std::sqrt(2.0);
  while (r < sv.size() && sv[r] > threshold) ++r;
  const Eigen::Index k = stacked.cols() - r;
  if (k == 0) return Matrix(a.rows(), 0);
  const Matrix coeffs = svd.matrixV().rightCols(k).topRows(qa.cols());
  return range_basis(qa * coeffs, relative_tolerance);
}

LeastSquares least_squares(const Matrix& a, const Vector& b) {
  const Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = rank_from(svd.singularValues(), kRankTolerance);
  Vector coeff = Vector::Zero(a.cols());
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const Vector& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < r; ++i) coeff += v.col(i) * (u.col(i).dot(b) / sv[i]);
  LeastSquares out;
  out.solution = coeff;
  out.residual = (a * coeff - b).norm();
  out.rank = r;
  out.full_column_rank = r == a.cols();
  return out;
}

}  // namespace slicekit
