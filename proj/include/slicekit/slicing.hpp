#pragma once

// Slicings (M, alpha, X) of a vector field Z on P: residuals, fibred and
// complete slicings, constants of the motion and flow-box families.

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicekit/dynamics.hpp"
#include "slicekit/geometry.hpp"
#include "slicekit/report.hpp"

namespace slicekit {

/// X was not given and alpha is not an immersion at the point.
class NotImmersive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// pi(alpha(x)) != x for a supposed section.
class SectionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Z vanishes where a flow box was requested.
class CriticalPoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TransversalityFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Slicing {
  SmoothMap map;                     // alpha: M -> P
  std::optional<VectorField> field;  // X on M

  const SpaceRef& base() const { return map.source(); }
};

/// X(x), either declared or the least-squares solution of J v = Z(alpha(x)).
Vector slicing_field_at(const Slicing& s, const VectorField& z, const Vector& x);

/// J_alpha(x) X(x) - Z(alpha(x)).
Vector slicing_residual(const Slicing& s, const VectorField& z, const Vector& x);

CheckReport check_slicing(const Slicing& s, const VectorField& z, const SamplePlan& plan, double tolerance = 1e-8);
CheckReport check_slicing(const Slicing& s, const VectorField& z, const std::vector<Vector>& samples,
                          double tolerance = 1e-8);

class FibredStructure {
 public:
  /// With `adapted_base_dim` = m the projection must be exactly the first m
  /// coordinates of P.
  explicit FibredStructure(SmoothMap projection, std::optional<Eigen::Index> adapted_base_dim = std::nullopt);

  const SmoothMap& projection() const noexcept { return projection_; }
  const SpaceRef& total() const noexcept { return projection_.source(); }
  const SpaceRef& base() const noexcept { return projection_.target(); }
  const std::optional<Eigen::Index>& adapted_base_dim() const noexcept { return adapted_; }
  Eigen::Index fibre_dimension() const { return total()->dimension() - base()->dimension(); }

  /// Throws SectionViolation unless |pi(alpha(x)) - x| <= 1e-10.
  void require_section(const SmoothMap& section, const Vector& x) const;

 private:
  SmoothMap projection_;
  std::optional<Eigen::Index> adapted_;
};

/// X(x) = J_pi(alpha(x)) Z(alpha(x)).
Vector induced_slicing_field(const FibredStructure& fib, const SmoothMap& section, const VectorField& z, const Vector& x);

/// Residual J_alpha X - Z(alpha) with the induced X. The metric
/// "vertical_defect_max" holds max |J_pi r|, which should vanish regardless
/// of the verdict.
CheckReport check_fibred_slicing(const FibredStructure& fib, const SmoothMap& section, const VectorField& z,
                                 const SamplePlan& plan, double tolerance = 1e-8);

struct CompleteSlicing {
  SpaceRef parameters;                // N
  SmoothMap family;                   // alpha-bar: M x N -> P
  std::optional<SmoothMap> inverse;   // P -> M x N
  std::optional<SmoothMap> fields;    // M x N -> components of X_c in M coordinates

  CompleteSlicing(SpaceRef base, SpaceRef parameters, SmoothMap family, std::optional<SmoothMap> inverse = std::nullopt,
                  std::optional<SmoothMap> fields = std::nullopt);

  const SpaceRef& base() const noexcept { return base_; }
  const SpaceRef& product() const noexcept { return family.source(); }
  const SpaceRef& target() const noexcept { return family.target(); }
  Eigen::Index base_dim() const noexcept { return base_->dimension(); }

  /// (M, alpha_c, X_c).
  Slicing slice(const Vector& c) const;

 private:
  SpaceRef base_;
};

struct NewtonOptions {
  std::size_t max_iterations = 50;
  double tolerance = 1e-10;
  /// Points per axis of the forward grid used for seeding (capped at 4096 nodes).
  std::size_t seed_per_axis = 8;
};

/// Forward images of a coarse grid over the product space, used to seed Newton.
struct FamilySeeds {
  std::vector<Vector> params;
  std::vector<Vector> images;
};

FamilySeeds make_seeds(const CompleteSlicing& cs, const NewtonOptions& options = {});

/// Solves alpha-bar(w) = z by damped Gauss-Newton. Accepts w when the
/// residual is <= 1e-8 * max(1, |z|).
std::optional<Vector> invert_family(const CompleteSlicing& cs, const Vector& z, const FamilySeeds& seeds,
                                    const NewtonOptions& options = {});

struct CompleteCheckOptions {
  double tolerance = 1e-8;
  /// Sample of P for the coverage fraction; none skips it.
  std::optional<SamplePlan> coverage;
  NewtonOptions newton;
};

/// Slicing residual at each sample (x, c) of M x N. Metrics: coverage_fraction
/// and, with a declared inverse, inverse_roundtrip_max.
CheckReport check_complete_slicing(const CompleteSlicing& cs, const VectorField& z, const SamplePlan& plan,
                                   const CompleteCheckOptions& options = {});

struct ConstantFromComplete {
  SmoothMap constant;  // F: P -> N
  CheckReport report;
};

/// F = pr_2 o alpha-bar^{-1}, from the declared inverse or by Newton.
ConstantFromComplete constant_from_complete(const CompleteSlicing& cs, const DynamicalSystem& system,
                                            const SamplePlan& plan, const ConstantCheckOptions& options = {},
                                            const NewtonOptions& newton = {});

struct StraightenOptions {
  double t_min = -1.0;
  double t_max = 1.0;
  double dt = 1e-3;  // stored checkpoint spacing
  double integrator_tolerance = 1e-10;
};

/// alpha-bar(t, s) = Flow_t(transversal(s)) with X_s = d/dt. Trajectories for
/// the plan's samples are cached; other parameters are integrated on demand.
/// The family is numeric and only finite-difference differentiable.
CompleteSlicing straighten_local(const DynamicalSystem& system, const SmoothMap& transversal, const SamplePlan& plan,
                                 const StraightenOptions& options = {});

/// (M', alpha o phi, phi^* X) with (phi^* X)(x') = J_phi(x')^{-1} X(phi(x')).
/// Checks invertibility of J_phi and, if given, phi_inverse o phi = id at
/// `check_points`.
Slicing gauge_transform(const Slicing& s, const VectorField& z, const SmoothMap& phi,
                        const std::optional<SmoothMap>& phi_inverse, const std::vector<Vector>& check_points);

/// Rows "params..., base..., image..." over a sample of M x N.
void write_complete_csv(std::ostream& out, const CompleteSlicing& cs, const SamplePlan& plan);

}  // namespace slicekit
