#pragma once

// Symplectic Hamiltonian systems (P, omega, H).

#include <functional>
#include <string>
#include <vector>

#include "slicekit/dynamics.hpp"
#include "slicekit/slicing.hpp"

namespace slicekit {

class SymplecticSystem {
 public:
  SymplecticSystem(std::string name, BilinearFormField omega, Expression hamiltonian);

  const std::string& name() const noexcept { return name_; }
  const SpaceRef& space() const noexcept { return omega_.space(); }
  const BilinearFormField& omega() const noexcept { return omega_; }
  const Expression& hamiltonian() const noexcept { return h_; }

  /// Max |d omega| component at x; 0 for constant coefficients.
  double closedness_defect(const Vector& x) const;
  /// Throws std::invalid_argument when omega is not skew, not invertible or
  /// not closed (to 1e-8) at one of the points.
  void validate(const std::vector<Vector>& samples) const;

 private:
  std::string name_;
  BilinearFormField omega_;
  Expression h_;
};

/// Z^k = sum_l dH/dz^l omega^{lk}, with (omega^{kl}) the inverse matrix.
VectorField hamiltonian_vector_field(const SymplecticSystem& sys);

/// i_X alpha^*omega - d(alpha^*H) at x, as a covector on M.
Vector hj_residual(const SymplecticSystem& sys, const SmoothMap& alpha, const VectorField& x_field, const Vector& x);

CheckReport check_hj(const SymplecticSystem& sys, const SmoothMap& alpha, const VectorField& x_field,
                     const SamplePlan& plan, double tolerance = 1e-8);

enum class SubmanifoldKind { isotropic, coisotropic, lagrangian, none };
std::string to_string(SubmanifoldKind kind);

struct Classification {
  SubmanifoldKind kind = SubmanifoldKind::none;
  bool isotropic = false;
  bool coisotropic = false;
  /// Residual: max |alpha^*omega|. Metric "coisotropy_defect": distance of
  /// the omega-orthogonal from the tangent image.
  CheckReport report;
};

Classification classify_submanifold(const SymplecticSystem& sys, const SmoothMap& alpha, const SamplePlan& plan,
                                    double tolerance = 1e-8);

/// |d(alpha^*H)| for a Lagrangian alpha, cross-checked against tangency of
/// Z_H. Throws PreconditionError when alpha is not Lagrangian.
CheckReport check_lagrangian_slicing(const SymplecticSystem& sys, const SmoothMap& alpha, const SamplePlan& plan,
                                     double tolerance = 1e-8);

/// max |omega(w, w')| over a basis of ker T pi at each sample of P.
CheckReport check_fibre_isotropy(const FibredStructure& fib, const SymplecticSystem& sys, const SamplePlan& plan,
                                 double tolerance = 1e-8);

/// With isotropic fibres, alpha is a slicing section iff the HJ residual with
/// the induced X vanishes. Residual is |hj|; metrics record the fibred
/// verdict and whether the two agree. Throws PreconditionError when the
/// fibres through alpha(M) are not isotropic.
CheckReport fibred_hj_check(const FibredStructure& fib, const SymplecticSystem& sys, const SmoothMap& section,
                            const SamplePlan& plan, double tolerance = 1e-8);

struct VerticalBlock {
  Matrix block;  // -N + A^T Omega_f^T
  Eigen::Index rank = 0;
  bool injective = false;
};

/// Needs an adapted split: omega partitioned as (Omega_b N; -N^T Omega_f).
VerticalBlock vertical_block(const FibredStructure& fib, const SymplecticSystem& sys, const SmoothMap& section,
                             const Vector& x);

/// Matrix B(z) with {f, g} = grad f^T B grad g.
using BracketMatrix = std::function<Matrix(const Vector&)>;

/// max |{F^i, F^j}| over pairs and samples.
CheckReport involution_check(const SpaceRef& space, const BracketMatrix& bracket, const std::vector<Expression>& functions,
                             const SamplePlan& plan, double tolerance = 1e-8);
CheckReport involution_check(const SymplecticSystem& sys, const std::vector<Expression>& functions,
                             const SamplePlan& plan, double tolerance = 1e-8);

/// Split layout (q^1..q^n, p_1..p_n). alpha = dW; residual |grad_q (H o dW)|,
/// metric "spread" = max - min of H o dW. W is an expression over P's
/// coordinates that may only use the q's; `base` supplies the sampling domain.
CheckReport classical_hj_check(const SymplecticSystem& sys, const SpaceRef& base, const Expression& w,
                               const SamplePlan& plan, double tolerance = 1e-8);

/// (q, grad W(q)) as a numeric section.
SmoothMap exact_section(const SymplecticSystem& sys, const SpaceRef& base, const Expression& w);

}  // namespace slicekit
