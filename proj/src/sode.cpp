#include "slicekit/sode.hpp"

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

SpaceRef make_base(const CoordinateSpace& space, Eigen::Index m) {
  const std::vector<std::string> coords(space.coordinates().begin(), space.coordinates().begin() + m);
  auto base = std::make_shared<CoordinateSpace>(space.name() + "/base", coords);
  std::vector<Interval> bounds;
  if (!space.bounds().empty()) bounds.assign(space.bounds().begin(), space.bounds().begin() + m);
  if (!bounds.empty()) base->set_bounds(bounds);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (space.period(static_cast<std::size_t>(i))) base->set_period(static_cast<std::size_t>(i), *space.period(static_cast<std::size_t>(i)));
  }
  return base;
}

Expression on_space(const Expression& e, const CoordinateSpace& space) {
  return e.variables() == space.coordinates() ? e : e.rebind(space.coordinates());
}

double second_order_defect(const TangentBundleSpace& tb, const VectorField& z, const Vector& x) {
  const Eigen::Index m = tb.m();
  return (z(x).head(m) - x.tail(m)).norm();
}

}  // namespace

TangentBundleSpace::TangentBundleSpace(SpaceRef space) : space_(std::move(space)), m_(space_->dimension() / 2) {
  if (space_->dimension() % 2 != 0 || m_ == 0) throw std::invalid_argument("a tangent bundle needs even dimension 2m > 0");
  base_ = make_base(*space_, m_);
}

FibredStructure TangentBundleSpace::fibration() const {
  std::vector<Expression> comps;
  for (Eigen::Index i = 0; i < m_; ++i) comps.push_back(Expression::variable(static_cast<std::size_t>(i), space_->coordinates()));
  return FibredStructure(SmoothMap("tau", space_, base_, std::move(comps)), m_);
}

CheckReport second_order_check(const TangentBundleSpace& tb, const VectorField& z, const SamplePlan& plan,
                               double tolerance) {
  return second_order_check(tb, z, generate_samples(plan, *tb.space()), tolerance);
}

CheckReport second_order_check(const TangentBundleSpace& tb, const VectorField& z, const std::vector<Vector>& samples,
                               double tolerance) {
  CheckReport report;
  report.check = "second-order";
  report.system = z.name();
  report.tolerance = tolerance;
  report.citation = "T tau o Z = Id";
  record_each(report, samples, [&](std::size_t, const Vector& x) { return second_order_defect(tb, z, x); });
  report.finalize();
  return report;
}

Vector fibre_derivative(const TangentBundleSpace& tb, const Expression& f, const Vector& x) {
  return gradient(on_space(f, *tb.space()), x).tail(tb.m());
}

Vector reconstruct_sode(const TangentBundleSpace& tb, const std::vector<Expression>& functions, const Vector& x) {
  const Eigen::Index m = tb.m();
  if (static_cast<Eigen::Index>(functions.size()) != m) {
    throw std::invalid_argument("reconstruction needs exactly m = " + std::to_string(m) + " functions");
  }
  Matrix a(m, m);
  Matrix b(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vector g = gradient(on_space(functions[static_cast<std::size_t>(k)], *tb.space()), x);
    b.row(k) = g.head(m).transpose();
    a.row(k) = g.tail(m).transpose();
  }
  const double cond = condition_number(a);
  if (!(cond <= kMaxFibreCondition)) {
    throw SingularFibreDerivative("fibre-derivative matrix is singular (condition number " + format_real(cond) + ")", cond);
  }
  Vector z(2 * m);
  z.head(m) = x.tail(m);
  z.tail(m) = -a.partialPivLu().solve(b * x.tail(m));
  return z;
}

VectorField sode_field(const TangentBundleSpace& tb, const std::vector<Expression>& functions, std::string name) {
  std::vector<Expression> fs;
  for (const auto& f : functions) fs.push_back(on_space(f, *tb.space()));
  if (static_cast<Eigen::Index>(fs.size()) != tb.m()) {
    throw std::invalid_argument("reconstruction needs exactly m = " + std::to_string(tb.m()) + " functions");
  }
  const TangentBundleSpace bundle = tb;
  return VectorField(std::move(name), tb.space(), [bundle, fs](const Vector& x) { return reconstruct_sode(bundle, fs, x); });
}

CheckReport check_sode_reconstruction(const TangentBundleSpace& tb, const std::vector<Expression>& functions,
                                      const SamplePlan& plan, double tolerance) {
  const VectorField z = sode_field(tb, functions);
  std::vector<Expression> fs;
  for (const auto& f : functions) fs.push_back(on_space(f, *tb.space()));
  const auto samples = generate_samples(plan, *tb.space());
  CheckReport report;
  report.check = "reconstruct-sode";
  report.system = tb.space()->name();
  report.tolerance = tolerance;
  report.citation = "second-order Z with L_Z f = 0 for each f";
  record_each(report, samples, [&](std::size_t, const Vector& x) {
    const Vector zx = z(x);
    double worst = (zx.head(tb.m()) - x.tail(tb.m())).norm();
    for (const auto& f : fs) worst = std::max(worst, std::abs(gradient(f, x).dot(zx)));
    return worst;
  });
  report.finalize();
  return report;
}

CheckReport section_field_check(const TangentBundleSpace& tb, const VectorField& z, const SmoothMap& section,
                                const SamplePlan& plan, double tolerance) {
  const auto samples = generate_samples(plan, *section.source());
  const FibredStructure fib = tb.fibration();
  const Eigen::Index m = tb.m();
  for (const auto& q : samples) {
    fib.require_section(section, q);
    const double defect = second_order_defect(tb, z, section(q));
    if (!(defect <= tolerance)) {
      throw PreconditionError("'" + z.name() + "' is not second order on the image (defect " + format_real(defect) + ")");
    }
  }
  CheckReport report;
  report.check = "section-field";
  report.system = z.name() + " / " + section.name();
  report.tolerance = tolerance;
  report.citation = "for a second-order Z the induced X equals alpha";
  record_each(report, samples, [&](std::size_t, const Vector& q) {
    return (induced_slicing_field(fib, section, z, q) - section(q).tail(m)).norm();
  });
  report.finalize();
  return report;
}

CheckReport second_order_from_family_check(const TangentBundleSpace& tb, const VectorField& z, const CompleteSlicing& cs,
                                           const SamplePlan& plan, double tolerance) {
  const Eigen::Index m = tb.m();
  if (cs.base_dim() != m || cs.target()->dimension() != 2 * m) {
    throw std::invalid_argument("family must map M x N into the tangent bundle of M");
  }
  const auto samples = generate_samples(plan, *cs.product());
  const auto& base_space = cs.base();
  for (const auto& w : samples) {
    const Vector q = w.head(m);
    const Slicing s = cs.slice(w.tail(w.size() - m));
    const Vector p = s.map(q);
    if (!(base_space->difference(p.head(m), q).norm() <= 1e-10)) {
      throw PreconditionError("family member is not a section of tau");
    }
    const double gap = (slicing_field_at(s, z, q) - p.tail(m)).norm();
    if (!(gap <= tolerance)) throw PreconditionError("X_c differs from alpha_c (gap " + format_real(gap) + ")");
  }
  std::vector<Vector> images;
  for (const auto& w : samples) images.push_back(cs.family(w));
  CheckReport report = second_order_check(tb, z, images, tolerance);
  report.check = "second-order-from-family";
  report.citation = "X_c = alpha_c for every c forces the second-order condition";
  return report;
}

}  // namespace slicekit
