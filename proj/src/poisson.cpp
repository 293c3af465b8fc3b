#include "slicekit/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

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

// {g, h} evaluated at a point of scalar type T.
template <typename T>
T inner_bracket(const BilinearFormField& lambda, const Expression& g, const Expression& h, std::span<const T> z) {
  const auto n = static_cast<std::size_t>(lambda.size());
  std::vector<T> dg(n);
  std::vector<T> dh(n);
  for (std::size_t i = 0; i < n; ++i) {
    dg[i] = partial<T>(g, z, i);
    dh[i] = partial<T>(h, z, i);
  }
  T sum = detail::make_constant<T>(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (lambda.entry(ii, jj).is_constant() && lambda.entry(ii, jj).evaluate(Vector::Zero(lambda.size())) == 0.0) continue;
      sum += lambda.entry_value<T>(ii, jj, z) * dg[i] * dh[j];
    }
  }
  return sum;
}

// {f, {g, h}} at x: the outer gradient of the inner bracket via duals.
double nested_bracket(const BilinearFormField& lambda, const Expression& f, const Expression& g, const Expression& h,
                      const Vector& x) {
  const Eigen::Index n = lambda.size();
  Vector d_inner(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::vector<Dual<double>> z(x.data(), x.data() + n);
    z[static_cast<std::size_t>(k)].der = 1.0;
    d_inner[k] = inner_bracket<Dual<double>>(lambda, g, h, std::span<const Dual<double>>(z)).der;
  }
  return gradient(f, x).dot(lambda(x) * d_inner);
}

}  // namespace

PoissonSystem::PoissonSystem(std::string name, BilinearFormField lambda, Expression hamiltonian)
    : name_(std::move(name)), lambda_(std::move(lambda)), h_(on_space(hamiltonian, *lambda_.space())) {
  if (lambda_.kind() != FormKind::poisson) throw std::invalid_argument("'" + lambda_.name() + "' is not a bivector");
}

void PoissonSystem::validate(const std::vector<Vector>& samples) const {
  for (const auto& x : samples) {
    if (lambda_.skew_defect(x) > 1e-12 * std::max(1.0, lambda_(x).cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("'" + lambda_.name() + "' is not skew at a sample");
    }
  }
}

PoissonSystem poisson_from_symplectic(const SymplecticSystem& sys) {
  const BilinearFormField& w = sys.omega();
  if (!w.constant_coefficients()) throw std::invalid_argument("only constant-coefficient forms convert to a bivector");
  const Matrix b = checked_inverse(w(Vector::Zero(w.size())), "'" + w.name() + "'").transpose();
  const auto& vars = sys.space()->coordinates();
  std::vector<Expression> entries;
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) entries.push_back(Expression::constant(b(i, j), vars));
  }
  return PoissonSystem(sys.name(), BilinearFormField(w.name() + "^-T", sys.space(), FormKind::poisson, std::move(entries)),
                       sys.hamiltonian());
}

double poisson_bracket(const PoissonSystem& ps, const Expression& f, const Expression& g, const Vector& x) {
  const auto& space = *ps.space();
  return gradient(on_space(f, space), x).dot(ps.lambda()(x) * gradient(on_space(g, space), x));
}

VectorField hamiltonian_vf_poisson(const PoissonSystem& ps) {
  const BilinearFormField lambda = ps.lambda();
  const Expression h = ps.hamiltonian();
  return VectorField("Z_" + ps.name(), ps.space(),
                     [lambda, h](const Vector& z) -> Vector { return lambda(z) * gradient(h, z); });
}

CheckReport jacobi_check(const PoissonSystem& ps, const SamplePlan& plan, std::vector<Expression> functions,
                         double tolerance) {
  const auto& space = *ps.space();
  if (functions.empty()) {
    for (std::size_t i = 0; i < space.coordinates().size(); ++i) functions.push_back(Expression::variable(i, space.coordinates()));
  } else {
    for (auto& f : functions) f = on_space(f, space);
  }
  const auto samples = generate_samples(plan, space);
  CheckReport report;
  report.check = "jacobi";
  report.system = ps.name();
  report.tolerance = tolerance;
  report.citation = "{f,{g,h}} + {g,{h,f}} + {h,{f,g}} = 0";
  const BilinearFormField& lambda = ps.lambda();
  record_each(report, samples, [&](std::size_t, const Vector& x) {
    double worst = 0.0;
    const std::size_t k = functions.size();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        for (std::size_t c = b + 1; c < k; ++c) {
          const auto& f = functions[a];
          const auto& g = functions[b];
          const auto& h = functions[c];
          const double sum = nested_bracket(lambda, f, g, h, x) + nested_bracket(lambda, g, h, f, x) +
                             nested_bracket(lambda, h, f, g, x);
          worst = std::max(worst, std::abs(sum));
        }
      }
    }
    return worst;
  });
  report.finalize();
  return report;
}

CharacteristicData characteristic_data(const PoissonSystem& ps, const Vector& x) {
  const Matrix l = ps.lambda()(x);
  CharacteristicData out;
  out.rank = numerical_rank(l);
  out.kernel = null_space(l);
  out.image = range_basis(l);
  return out;
}

namespace {

struct LagrangianParts {
  Matrix j;
  Matrix annihilator;  // basis of (TP0)^o
  Matrix pushed;       // Lambda-hat of the annihilator
  double defect = 0.0;
};

LagrangianParts lagrangian_parts(const PoissonSystem& ps, const SmoothMap& alpha, const Vector& x) {
  LagrangianParts out;
  out.j = immersion_jacobian(alpha, x);
  const Matrix l = ps.lambda()(alpha(x));
  out.annihilator = null_space(out.j.transpose());
  out.pushed = l * out.annihilator;
  const Matrix lhs = out.pushed.size() == 0 ? Matrix(l.rows(), 0) : range_basis(out.pushed);
  const Matrix rhs = subspace_intersection(range_basis(out.j), range_basis(l));
  out.defect = subspace_distance(lhs, rhs);
  return out;
}

void note_rank_changes(CheckReport& report, const PoissonSystem& ps, const std::vector<Vector>& points) {
  std::set<Eigen::Index> ranks;
  for (const auto& p : points) {
    try {
      ranks.insert(numerical_rank(ps.lambda()(p)));
    } catch (const std::exception&) {
    }
  }
  if (ranks.size() > 1) report.notes.push_back("rank of Lambda varies across samples");
  if (!ranks.empty()) report.metrics["lambda_rank_min"] = static_cast<double>(*ranks.begin());
}

}  // namespace

CheckReport poisson_lagrangian_check(const PoissonSystem& ps, const SmoothMap& alpha, const SamplePlan& plan,
                                     double tolerance) {
  const auto samples = generate_samples(plan, *alpha.source());
  CheckReport report;
  report.check = "poisson-lagrangian";
  report.system = ps.name() + " / " + alpha.name();
  report.tolerance = tolerance;
  report.citation = "Lambda-hat((TP0)^o) = TP0 ∩ C";
  record_each(report, samples, [&](std::size_t, const Vector& x) { return lagrangian_parts(ps, alpha, x).defect; });
  std::vector<Vector> images;
  for (const auto& x : samples) images.push_back(alpha(x));
  note_rank_changes(report, ps, images);
  report.finalize();
  return report;
}

CheckReport poisson_slicing_check(const PoissonSystem& ps, const SmoothMap& alpha, const SamplePlan& plan,
                                  double tolerance) {
  const auto samples = generate_samples(plan, *alpha.source());
  CheckReport report;
  report.check = "poisson-slicing";
  report.system = ps.name() + " / " + alpha.name();
  report.tolerance = tolerance;
  report.citation = "dH o alpha annihilates Lambda-hat((TP0)^o)";
  std::vector<double> kernel_form(samples.size(), -1.0);
  record_each(report, samples, [&](std::size_t i, const Vector& x) {
    const LagrangianParts parts = lagrangian_parts(ps, alpha, x);
    const Vector p = alpha(x);
    const Vector dh = gradient(ps.hamiltonian(), p);
    if (parts.defect <= tolerance) {
      const Vector pulled = parts.j.transpose() * dh;
      const Matrix k = null_space(ps.lambda()(p));
      kernel_form[i] = k.cols() == 0 ? pulled.norm() : least_squares(parts.j.transpose() * k, pulled).residual;
    }
    if (parts.pushed.cols() == 0 || parts.pushed.norm() == 0.0) return 0.0;
    const Matrix q = range_basis(parts.pushed);
    return (q.transpose() * dh).norm();
  });
  report.finalize();
  double kmax = -1.0;
  for (double v : kernel_form) kmax = std::max(kmax, v);
  if (kmax >= 0.0) report.metrics["kernel_form_residual"] = kmax;
  const TangencyReport t = check_tangency(hamiltonian_vf_poisson(ps), alpha, samples, tolerance);
  report.metrics["tangency_max"] = t.report.max;
  report.metrics["cross_check_agrees"] = t.report.pass == report.pass ? 1.0 : 0.0;
  if (t.report.pass != report.pass) report.notes.push_back("tangency cross-check disagrees");
  return report;
}

CheckReport involution_check(const PoissonSystem& ps, const std::vector<Expression>& functions, const SamplePlan& plan,
                             double tolerance) {
  const BilinearFormField lambda = ps.lambda();
  CheckReport r = involution_check(ps.space(), [lambda](const Vector& z) { return lambda(z); }, functions, plan, tolerance);
  r.system = ps.name();
  return r;
}

}  // namespace slicekit
