#pragma once

// Almost-Poisson systems (P, Lambda, H). Convention: Lambda-hat(beta) =
// Lambda * beta, so Z_H = Lambda grad H and {f, g} = grad f^T Lambda grad g.

#include <string>
#include <vector>

#include "slicekit/symplectic.hpp"

namespace slicekit {

class PoissonSystem {
 public:
  PoissonSystem(std::string name, BilinearFormField lambda, Expression hamiltonian);

  const std::string& name() const noexcept { return name_; }
  const SpaceRef& space() const noexcept { return lambda_.space(); }
  const BilinearFormField& lambda() const noexcept { return lambda_; }
  const Expression& hamiltonian() const noexcept { return h_; }

  /// Throws std::invalid_argument when Lambda is not skew at a point.
  void validate(const std::vector<Vector>& samples) const;

 private:
  std::string name_;
  BilinearFormField lambda_;
  Expression h_;
};

/// Lambda = (Omega^{-1})^T for constant-coefficient Omega, which gives the
/// same Hamiltonian vector field.
PoissonSystem poisson_from_symplectic(const SymplecticSystem& sys);

double poisson_bracket(const PoissonSystem& ps, const Expression& f, const Expression& g, const Vector& x);

VectorField hamiltonian_vf_poisson(const PoissonSystem& ps);

/// max |{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| over triples of `functions`
/// (default: the coordinate functions) and samples. Inner brackets are
/// differentiated exactly with nested dual numbers.
CheckReport jacobi_check(const PoissonSystem& ps, const SamplePlan& plan, std::vector<Expression> functions = {},
                         double tolerance = 1e-8);

struct CharacteristicData {
  Eigen::Index rank = 0;
  Matrix kernel;  // basis of ker Lambda-hat (covectors)
  Matrix image;   // basis of C = Im Lambda-hat
};

CharacteristicData characteristic_data(const PoissonSystem& ps, const Vector& x);

/// Largest principal-angle sine between Lambda-hat((TP0)^o) and TP0 ∩ C.
CheckReport poisson_lagrangian_check(const PoissonSystem& ps, const SmoothMap& alpha, const SamplePlan& plan,
                                     double tolerance = 1e-8);

/// dH o alpha must annihilate Lambda-hat((TP0)^o). Residual is the part of
/// grad H(alpha(x)) along that subspace. For Lagrangian images the metric
/// "kernel_form_residual" tests alpha^*(dH) in T alpha^T (ker Lambda-hat).
/// Cross-checked against tangency of Z_H.
CheckReport poisson_slicing_check(const PoissonSystem& ps, const SmoothMap& alpha, const SamplePlan& plan,
                                  double tolerance = 1e-8);

CheckReport involution_check(const PoissonSystem& ps, const std::vector<Expression>& functions, const SamplePlan& plan,
                             double tolerance = 1e-8);

}  // namespace slicekit
