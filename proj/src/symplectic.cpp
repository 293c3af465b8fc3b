#include "slicekit/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slicekit/linalg.hpp"
#include "slicekit/parallel.hpp"

namespace slicekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Body>
void record_each(CheckReport& report, const std::vector<Vector>& samples, Body&& body) {
  report.samples.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    SampleRecord& rec = report.samples[i];
    rec.point = samples[i];
    try {
      rec.residual = body(i, samples[i]);
    } catch (const std::exception& e) {
      rec.residual = kInf;
      rec.error = e.what();
    }
  });
}

Expression on_space(const Expression& e, const CoordinateSpace& space) {
  return e.variables() == space.coordinates() ? e : e.rebind(space.coordinates());
}

Matrix immersion_jacobian(const SmoothMap& alpha, const Vector& x) {
  const Matrix j = jacobian(alpha, x);
  const auto r = numerical_rank(j);
  if (r < j.cols()) {
    throw PreconditionError("'" + alpha.name() + "' is not an immersion here (rank " + std::to_string(r) + " < " +
                            std::to_string(j.cols()) + ")");
  }
  return j;
}

double fibre_isotropy_at(const FibredStructure& fib, const SymplecticSystem& sys, const Vector& z) {
  const Matrix jpi = jacobian(fib.projection(), z);
  if (numerical_rank(jpi) < jpi.rows()) throw PreconditionError("projection is not a submersion here");
  const Matrix k = null_space(jpi);
  if (k.cols() < 2) return 0.0;
  return (k.transpose() * sys.omega()(z) * k).cwiseAbs().maxCoeff();
}

}  // namespace

SymplecticSystem::SymplecticSystem(std::string name, BilinearFormField omega, Expression hamiltonian)
    : name_(std::move(name)), omega_(std::move(omega)), h_(on_space(hamiltonian, *omega_.space())) {
  if (omega_.kind() != FormKind::symplectic) throw std::invalid_argument("'" + omega_.name() + "' is not a two-form");
  if (omega_.size() % 2 != 0) throw std::invalid_argument("a symplectic space must have even dimension");
}

double SymplecticSystem::closedness_defect(const Vector& x) const {
  if (omega_.constant_coefficients()) return 0.0;
  const Eigen::Index n = omega_.size();
  std::vector<Vector> grads(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) grads[static_cast<std::size_t>(i * n + j)] = gradient(omega_.entry(i, j), x);
  }
  auto d = [&](Eigen::Index k, Eigen::Index i, Eigen::Index j) { return grads[static_cast<std::size_t>(i * n + j)][k]; };
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      for (Eigen::Index m = l + 1; m < n; ++m) {
        worst = std::max(worst, std::abs(d(k, l, m) + d(l, m, k) + d(m, k, l)));
      }
    }
  }
  return worst;
}

void SymplecticSystem::validate(const std::vector<Vector>& samples) const {
  for (const auto& x : samples) {
    const Matrix w = omega_(x);
    if (omega_.skew_defect(x) > 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("'" + omega_.name() + "' is not skew at a sample");
    }
    try {
      checked_inverse(w, "'" + omega_.name() + "'");
    } catch (const SingularMatrix& e) {
      throw std::invalid_argument(e.what());
    }
    const double closed = closedness_defect(x);
    if (!(closed <= 1e-8)) throw std::invalid_argument("'" + omega_.name() + "' is not closed: " + format_real(closed));
  }
}

VectorField hamiltonian_vector_field(const SymplecticSystem& sys) {
  const BilinearFormField omega = sys.omega();
  const Expression h = sys.hamiltonian();
  std::optional<Matrix> fixed;
  if (omega.constant_coefficients()) {
    fixed = checked_inverse(omega(Vector::Zero(omega.size())), "'" + omega.name() + "'").transpose();
  }
  return VectorField("Z_" + sys.name(), sys.space(), [omega, h, fixed](const Vector& z) -> Vector {
    const Vector g = gradient(h, z);
    if (fixed) return *fixed * g;
    return checked_inverse(omega(z), "'" + omega.name() + "'").transpose() * g;
  });
}

Vector hj_residual(const SymplecticSystem& sys, const SmoothMap& alpha, const VectorField& x_field, const Vector& x) {
  const Matrix j = jacobian(alpha, x);
  const Vector p = alpha(x);
  return j.transpose() * (sys.omega()(p).transpose() * (j * x_field(x))) - j.transpose() * gradient(sys.hamiltonian(), p);
}

CheckReport check_hj(const SymplecticSystem& sys, const SmoothMap& alpha, const VectorField& x_field,
                     const SamplePlan& plan, double tolerance) {
  const auto samples = generate_samples(plan, *alpha.source());
  CheckReport report;
  report.check = "hj-residual";
  report.system = sys.name() + " / " + alpha.name();
  report.tolerance = tolerance;
  report.citation = "i_X alpha^*omega - d alpha^*H = 0";
  record_each(report, samples, [&](std::size_t, const Vector& x) { return hj_residual(sys, alpha, x_field, x).norm(); });
  report.finalize();
  return report;
}

std::string to_string(SubmanifoldKind kind) {
  switch (kind) {
    case SubmanifoldKind::isotropic:
      return "isotropic";
    case SubmanifoldKind::coisotropic:
      return "coisotropic";
    case SubmanifoldKind::lagrangian:
      return "lagrangian";
    case SubmanifoldKind::none:
      break;
  }
  return "none";
}

Classification classify_submanifold(const SymplecticSystem& sys, const SmoothMap& alpha, const SamplePlan& plan,
                                    double tolerance) {
  const auto samples = generate_samples(plan, *alpha.source());
  Classification out;
  CheckReport& report = out.report;
  report.check = "classify";
  report.system = sys.name() + " / " + alpha.name();
  report.tolerance = tolerance;
  report.citation = "isotropic iff alpha^*omega = 0; Lagrangian iff also dim P = 2 dim M";
  std::vector<double> cois(samples.size(), 0.0);
  record_each(report, samples, [&](std::size_t i, const Vector& x) {
    const Matrix j = immersion_jacobian(alpha, x);
    const Matrix w = sys.omega()(alpha(x));
    const Matrix q = range_basis(j);
    const Matrix k = null_space(j.transpose() * w);
    cois[i] = k.cols() == 0 ? 0.0 : (k - q * (q.transpose() * k)).colwise().norm().maxCoeff();
    return (j.transpose() * w * j).cwiseAbs().maxCoeff();
  });
  report.finalize();
  for (const auto& s : report.samples) {
    if (!s.error.empty()) throw PreconditionError(s.error);
  }
  const double cmax = cois.empty() ? 0.0 : *std::max_element(cois.begin(), cois.end());
  report.metrics["coisotropy_defect"] = cmax;
  out.isotropic = report.pass;
  const bool half = 2 * alpha.source()->dimension() == sys.space()->dimension();
  out.coisotropic = cmax <= tolerance || (out.isotropic && half);
  if (out.isotropic && out.coisotropic) {
    out.kind = SubmanifoldKind::lagrangian;
  } else if (out.isotropic) {
    out.kind = SubmanifoldKind::isotropic;
  } else if (out.coisotropic) {
    out.kind = SubmanifoldKind::coisotropic;
  }
  report.notes.push_back("kind: " + to_string(out.kind));
  return out;
}

CheckReport check_lagrangian_slicing(const SymplecticSystem& sys, const SmoothMap& alpha, const SamplePlan& plan,
                                     double tolerance) {
  const Classification c = classify_submanifold(sys, alpha, plan, tolerance);
  if (c.kind != SubmanifoldKind::lagrangian) {
    throw PreconditionError("'" + alpha.name() + "' is not Lagrangian (" + to_string(c.kind) + ")");
  }
  const auto samples = generate_samples(plan, *alpha.source());
  CheckReport report;
  report.check = "lagrangian-slicing";
  report.system = sys.name() + " / " + alpha.name();
  report.tolerance = tolerance;
  report.citation = "a Lagrangian alpha is a slicing iff d(alpha^*H) = 0";
  record_each(report, samples, [&](std::size_t, const Vector& x) {
    return pullback_function(alpha, sys.hamiltonian(), x).differential.norm();
  });
  report.finalize();
  const TangencyReport t = check_tangency(hamiltonian_vector_field(sys), alpha, samples, tolerance);
  report.metrics["tangency_max"] = t.report.max;
  report.metrics["cross_check_agrees"] = t.report.pass == report.pass ? 1.0 : 0.0;
  if (t.report.pass != report.pass) report.notes.push_back("tangency cross-check disagrees");
  return report;
}

CheckReport check_fibre_isotropy(const FibredStructure& fib, const SymplecticSystem& sys, const SamplePlan& plan,
                                 double tolerance) {
  const auto samples = generate_samples(plan, *sys.space());
  CheckReport report;
  report.check = "fibre-isotropy";
  report.system = sys.name() + " / " + fib.projection().name();
  report.tolerance = tolerance;
  report.citation = "the fibres of pi are isotropic";
  record_each(report, samples, [&](std::size_t, const Vector& z) { return fibre_isotropy_at(fib, sys, z); });
  report.metrics["fibre_dimension"] = static_cast<double>(fib.fibre_dimension());
  report.finalize();
  return report;
}

CheckReport fibred_hj_check(const FibredStructure& fib, const SymplecticSystem& sys, const SmoothMap& section,
                            const SamplePlan& plan, double tolerance) {
  const auto samples = generate_samples(plan, *section.source());
  for (const auto& x : samples) {
    fib.require_section(section, x);
    const double iso = fibre_isotropy_at(fib, sys, section(x));
    if (!(iso <= tolerance)) {
      throw PreconditionError("fibres of '" + fib.projection().name() + "' are not isotropic (|omega| on fibre = " +
                              format_real(iso) + ")");
    }
  }
  const VectorField z = hamiltonian_vector_field(sys);
  CheckReport report;
  report.check = "fibred-hj";
  report.system = sys.name() + " / " + section.name();
  report.tolerance = tolerance;
  report.citation = "with isotropic fibres, alpha is a slicing section iff i_X alpha^*omega - d alpha^*H = 0";
  const VectorField induced("X", section.source(),
                            [&fib, &section, &z](const Vector& x) { return induced_slicing_field(fib, section, z, x); });
  record_each(report, samples, [&](std::size_t, const Vector& x) { return hj_residual(sys, section, induced, x).norm(); });
  report.finalize();
  const CheckReport fibred = check_fibred_slicing(fib, section, z, plan, tolerance);
  report.metrics["fibred_max"] = fibred.max;
  report.metrics["verdicts_agree"] = fibred.pass == report.pass ? 1.0 : 0.0;
  if (fibred.pass != report.pass) report.notes.push_back("fibred-slicing verdict disagrees");
  return report;
}

VerticalBlock vertical_block(const FibredStructure& fib, const SymplecticSystem& sys, const SmoothMap& section,
                             const Vector& x) {
  if (!fib.adapted_base_dim()) throw PreconditionError("vertical_block needs an adapted coordinate split");
  fib.require_section(section, x);
  const Eigen::Index m = *fib.adapted_base_dim();
  const Eigen::Index f = fib.fibre_dimension();
  const Matrix w = sys.omega()(section(x));
  const Matrix n = w.topRightCorner(m, f);
  const Matrix omega_f = w.bottomRightCorner(f, f);
  const Matrix a = jacobian(section, x).bottomRows(f);
  VerticalBlock out;
  out.block = -n + a.transpose() * omega_f.transpose();
  out.rank = numerical_rank(out.block);
  out.injective = out.rank == f;
  return out;
}

CheckReport involution_check(const SpaceRef& space, const BracketMatrix& bracket, const std::vector<Expression>& functions,
                             const SamplePlan& plan, double tolerance) {
  if (functions.size() < 2) throw std::invalid_argument("involution needs at least two functions");
  std::vector<Expression> fs;
  for (const auto& f : functions) fs.push_back(on_space(f, *space));
  const auto samples = generate_samples(plan, *space);
  CheckReport report;
  report.check = "involution";
  report.system = space->name();
  report.tolerance = tolerance;
  report.citation = "{F^i, F^j} = 0 iff the level sets are coisotropic";
  record_each(report, samples, [&](std::size_t, const Vector& z) {
    const Matrix b = bracket(z);
    std::vector<Vector> g;
    for (const auto& f : fs) g.push_back(gradient(f, z));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) worst = std::max(worst, std::abs(g[i].dot(b * g[j])));
    }
    return worst;
  });
  report.finalize();
  if (!report.pass) {
    report.notes.push_back("not in involution");
  } else if (2 * static_cast<Eigen::Index>(fs.size()) == space->dimension()) {
    report.notes.push_back("in involution with count = dim P / 2: level sets are Lagrangian");
  } else {
    report.notes.push_back("in involution: level sets are coisotropic");
  }
  return report;
}

CheckReport involution_check(const SymplecticSystem& sys, const std::vector<Expression>& functions,
                             const SamplePlan& plan, double tolerance) {
  const BilinearFormField omega = sys.omega();
  CheckReport r = involution_check(
      sys.space(), [omega](const Vector& z) { return checked_inverse(omega(z), "'" + omega.name() + "'"); }, functions,
      plan, tolerance);
  r.system = sys.name();
  return r;
}

namespace {

void require_base_only(const SymplecticSystem& sys, const SpaceRef& base, const Expression& w) {
  const Eigen::Index n = base->dimension();
  if (2 * n != sys.space()->dimension()) throw std::invalid_argument("base must have half the phase-space dimension");
  for (Eigen::Index i = n; i < 2 * n; ++i) {
    if (w.depends_on(static_cast<std::size_t>(i))) {
      throw std::invalid_argument("W references fibre coordinate '" +
                                  sys.space()->coordinates()[static_cast<std::size_t>(i)] + "'");
    }
  }
}

Vector lift(const Vector& q) {
  Vector z = Vector::Zero(2 * q.size());
  z.head(q.size()) = q;
  return z;
}

}  // namespace

SmoothMap exact_section(const SymplecticSystem& sys, const SpaceRef& base, const Expression& w) {
  const Expression we = on_space(w, *sys.space());
  require_base_only(sys, base, we);
  const Eigen::Index n = base->dimension();
  return SmoothMap("dW", base, sys.space(), [we, n](const Vector& q) {
    Vector z = lift(q);
    z.tail(n) = gradient(we, z).head(n);
    return z;
  });
}

CheckReport classical_hj_check(const SymplecticSystem& sys, const SpaceRef& base, const Expression& w,
                               const SamplePlan& plan, double tolerance) {
  const Expression we = on_space(w, *sys.space());
  require_base_only(sys, base, we);
  const Eigen::Index n = base->dimension();
  const auto samples = generate_samples(plan, *base);
  CheckReport report;
  report.check = "classical-hj";
  report.system = sys.name() + " / W = " + we.to_string();
  report.tolerance = tolerance;
  report.citation = "H o dW = const";
  std::vector<double> values(samples.size(), 0.0);
  record_each(report, samples, [&](std::size_t i, const Vector& q) {
    Vector z = lift(q);
    const Vector g = gradient(we, z);
    const Matrix hw = hessian(we, z).topLeftCorner(n, n);
    z.tail(n) = g.head(n);
    const Vector gh = gradient(sys.hamiltonian(), z);
    values[i] = sys.hamiltonian().evaluate(z);
    return (gh.head(n) + hw * gh.tail(n)).norm();
  });
  report.finalize();
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!report.samples[i].error.empty()) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  if (lo <= hi) {
    report.metrics["spread"] = hi - lo;
    report.metrics["energy_min"] = lo;
  }
  return report;
}

}  // namespace slicekit
