#pragma once

// Dynamics on a tangent bundle with coordinates (q^1..q^m, v^1..v^m).

#include <stdexcept>
#include <string>
#include <vector>

#include "slicekit/slicing.hpp"

namespace slicekit {

class TangentBundleSpace {
 public:
  /// `space` must have even dimension 2m; the first m coordinates are q.
  explicit TangentBundleSpace(SpaceRef space);

  const SpaceRef& space() const noexcept { return space_; }
  const SpaceRef& base() const noexcept { return base_; }
  Eigen::Index m() const noexcept { return m_; }

  /// tau: (q, v) -> q as an adapted fibration.
  FibredStructure fibration() const;

 private:
  SpaceRef space_;
  SpaceRef base_;
  Eigen::Index m_;
};

/// |Z_q(q, v) - v| at each sample.
CheckReport second_order_check(const TangentBundleSpace& tb, const VectorField& z, const SamplePlan& plan,
                               double tolerance = 1e-8);
CheckReport second_order_check(const TangentBundleSpace& tb, const VectorField& z, const std::vector<Vector>& samples,
                               double tolerance = 1e-8);

/// df/dv at x.
Vector fibre_derivative(const TangentBundleSpace& tb, const Expression& f, const Vector& x);

/// The m x m matrix (d f^a / d v^i) is singular or too ill-conditioned.
class SingularFibreDerivative : public std::runtime_error {
 public:
  SingularFibreDerivative(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

inline constexpr double kMaxFibreCondition = 1e12;

/// Z(q, v) = (v, -(df/dv)^{-1} (df/dq) v): the unique second-order field
/// with L_Z f^a = 0.
Vector reconstruct_sode(const TangentBundleSpace& tb, const std::vector<Expression>& functions, const Vector& x);

/// reconstruct_sode as a field evaluable anywhere.
VectorField sode_field(const TangentBundleSpace& tb, const std::vector<Expression>& functions, std::string name = "Z");

/// Residual per sample: max(|L_Z f^a|, second-order defect) for the
/// reconstructed Z. Singular points count as failures.
CheckReport check_sode_reconstruction(const TangentBundleSpace& tb, const std::vector<Expression>& functions,
                                      const SamplePlan& plan, double tolerance = 1e-8);

/// For a second-order Z and a section alpha(q) = (q, a(q)), the induced X
/// equals a. Residual |X(q) - a(q)|. Throws PreconditionError when Z is not
/// second order on alpha(M).
CheckReport section_field_check(const TangentBundleSpace& tb, const VectorField& z, const SmoothMap& section,
                                const SamplePlan& plan, double tolerance = 1e-8);

/// Converse: a complete family of sections with X_c = a_c forces Z to be
/// second order on the image. Residual is the second-order defect at
/// alpha_c(q). Throws PreconditionError when X_c differs from a_c.
CheckReport second_order_from_family_check(const TangentBundleSpace& tb, const VectorField& z, const CompleteSlicing& cs,
                                           const SamplePlan& plan, double tolerance = 1e-8);

}  // namespace slicekit
