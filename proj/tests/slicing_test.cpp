#include "slicekit/slicing.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "slicekit/linalg.hpp"

namespace slicekit {
namespace {

std::shared_ptr<CoordinateSpace> space(const std::string& name, std::vector<std::string> coords) {
  return std::make_shared<CoordinateSpace>(name, std::move(coords));
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

constexpr double kTwoPi = 6.283185307179586;

struct Radial {
  std::shared_ptr<CoordinateSpace> p = space("P", {"z1", "z2"});
  std::shared_ptr<CoordinateSpace> m = space("M", {"x"});
  std::shared_ptr<CoordinateSpace> n = space("N", {"u"});
  VectorField z;
  SpaceRef product;

  Radial() : z(VectorField::zero(p)) {
    p->add_constraint("z1^2 + z2^2 > 0");
    p->set_bounds({{-2, 2}, {-2, 2}});
    m->set_bounds({{-1, 1}});
    n->set_period(0, kTwoPi);
    n->set_bounds({{0, kTwoPi}});
    z = VectorField::parse("radial", p, {"z1", "z2"});
    product = product_space("MxN", *m, *n);
  }

  CompleteSlicing complete(bool with_inverse) const {
    std::optional<SmoothMap> inv;
    if (with_inverse) inv = SmoothMap::parse("inv", p, product, {"ln(z1^2 + z2^2)/2", "atan2(z2, z1)"});
    return CompleteSlicing(m, n, SmoothMap::parse("abar", product, p, {"exp(x)*cos(u)", "exp(x)*sin(u)"}), inv,
                           SmoothMap::parse("X", product, m, {"1"}));
  }
};

DynamicalSystem heisenberg() {
  auto p = space("H3", {"x", "y", "z"});
  p->add_constraint("z^2 > 0");
  p->add_constraint("x^2 + y^2 > 0");
  p->set_bounds({{-2, 2}, {-2, 2}, {-2, 2}});
  return {p, VectorField::parse("heisenberg", p, {"-z^2*y", "z^2*x", "0"})};
}

TEST(SlicingResidual, WorkedExamples) {
  Radial r;
  const double u = 0.4;
  const Slicing ray{SmoothMap::parse("alpha_u", r.m, r.p, {"exp(x)*" + format_real(std::cos(u)), "exp(x)*" + format_real(std::sin(u))}),
                    VectorField::parse("X", r.m, {"1"})};
  for (double x : {-0.8, 0.0, 0.6}) EXPECT_LE(slicing_residual(ray, r.z, vec({x})).norm(), 1e-15);

  auto r3 = space("R3", {"x", "y", "z"});
  const VectorField dx = VectorField::parse("d/dx", r3, {"1", "0", "0"});
  auto uv = space("UV", {"u", "v"});
  const Slicing plane{SmoothMap::parse("alpha", uv, r3, {"u", "0", "v"}), VectorField::parse("X", uv, {"1", "0"})};
  EXPECT_EQ(slicing_residual(plane, dx, vec({0.3, -1.0})).norm(), 0.0);

  const Slicing anything{SmoothMap::parse("curve", uv, r3, {"u*v", "sin(u)", "v^3"}), VectorField::zero(uv)};
  EXPECT_EQ(slicing_residual(anything, VectorField::zero(r3), vec({0.7, 0.2})).norm(), 0.0);
}

TEST(SlicingResidual, DerivedFieldAndNonImmersion) {
  Radial r;
  const Slicing ray{SmoothMap::parse("alpha", r.m, r.p, {"exp(x)", "0"}), std::nullopt};
  EXPECT_LE((slicing_field_at(ray, r.z, vec({0.2})) - vec({1.0})).norm(), 1e-14);
  EXPECT_LE(slicing_residual(ray, r.z, vec({0.2})).norm(), 1e-14);

  auto r3 = space("R3", {"x", "y", "z"});
  auto uv = space("UV", {"u", "v"});
  const Slicing flat{SmoothMap::parse("flat", uv, r3, {"u", "u", "0"}), std::nullopt};
  EXPECT_THROW(slicing_residual(flat, VectorField::parse("Z", r3, {"1", "1", "0"}), vec({0.1, 0.1})), NotImmersive);
}

struct DoubleOscillator {
  std::shared_ptr<CoordinateSpace> p = space("T*R2", {"x", "px", "y", "py"});
  std::shared_ptr<CoordinateSpace> m = space("R", {"x"});
  VectorField z = VectorField::parse("Z_H", p, {"px", "-x", "py", "-y"});
  FibredStructure fib{SmoothMap::parse("pr1", p, m, {"x"}), 1};

  DoubleOscillator() {
    m->add_constraint("1 - x^2 > 0");
    m->set_bounds({{-0.9, 0.9}});
  }
};

TEST(Fibred, CounterexampleResidualMatchesClosedForm) {
  DoubleOscillator d;
  const SmoothMap alpha = SmoothMap::parse("alpha", d.m, d.p, {"x", "x", "sqrt(1 - x^2)", "sqrt(1 - x^2)"});
  for (double x : {-0.9, -0.4, 0.0, 0.3, 0.85}) {
    EXPECT_NEAR(induced_slicing_field(d.fib, alpha, d.z, vec({x}))[0], x, 1e-15);
    const double s = std::sqrt(1 - x * x);
    const Slicing sl{alpha, VectorField::parse("X", d.m, {"x"})};
    const Vector r = slicing_residual(sl, d.z, vec({x}));
    EXPECT_LE((r - vec({0.0, 2 * x, -1 / s, s - x * x / s})).norm(), 1e-14);
  }
  const CheckReport rep = check_fibred_slicing(d.fib, alpha, d.z, {SampleStrategy::grid, {}, 19, 0});
  EXPECT_FALSE(rep.pass);
  EXPECT_GE(rep.max, 0.1);
  EXPECT_LE(rep.metrics.at("vertical_defect_max"), 1e-10);
}

TEST(Fibred, SectionsAndAdaptedSplit) {
  DoubleOscillator d;
  const SmoothMap not_section = SmoothMap::parse("bad", d.m, d.p, {"2*x", "0", "0", "0"});
  EXPECT_THROW(induced_slicing_field(d.fib, not_section, d.z, vec({0.5})), SectionViolation);
  EXPECT_THROW(FibredStructure(SmoothMap::parse("pr", d.p, d.m, {"px"}), 1), std::invalid_argument);
  EXPECT_NO_THROW(FibredStructure(SmoothMap::parse("pr", d.p, d.m, {"px"})));

  // Vertical Z gives X = 0 and any section passes.
  const VectorField vertical = VectorField::parse("V", d.p, {"0", "1", "0", "x"});
  const SmoothMap any = SmoothMap::parse("s", d.m, d.p, {"x", "x^2", "3", "sin(x)"});
  EXPECT_EQ(induced_slicing_field(d.fib, any, vertical, vec({0.2})).norm(), 0.0);
  EXPECT_TRUE(check_fibred_slicing(d.fib, any, VectorField::zero(d.p), {SampleStrategy::random, {}, 10, 0}).pass);
}

TEST(Fibred, FreeParticleExactDifferential) {
  auto p = space("T*R2", {"q1", "q2", "p1", "p2"});
  auto q = space("R2", {"q1", "q2"});
  q->set_bounds({{-1, 1}, {-1, 1}});
  const VectorField z = VectorField::parse("free", p, {"p1", "p2", "0", "0"});
  const FibredStructure fib(SmoothMap::parse("pi", p, q, {"q1", "q2"}), 2);
  const SmoothMap dw = SmoothMap::parse("dW", q, p, {"q1", "q2", "0.7", "-1.2"});
  EXPECT_LE((induced_slicing_field(fib, dw, z, vec({0.1, 0.5})) - vec({0.7, -1.2})).norm(), 1e-15);
  const CheckReport rep = check_fibred_slicing(fib, dw, z, {SampleStrategy::random, {}, 20, 0});
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max, 0.0);

  // Tilted momentum: not invariant, residual still pi-vertical.
  const SmoothMap tilted = SmoothMap::parse("tilt", q, p, {"q1", "q2", "q2", "q1^2"});
  const CheckReport bad = check_fibred_slicing(fib, tilted, z, {SampleStrategy::random, {}, 20, 1});
  EXPECT_FALSE(bad.pass);
  EXPECT_LE(bad.metrics.at("vertical_defect_max"), 1e-10);
}

TEST(Complete, RadialFamilyPassesAndCovers) {
  Radial r;
  CompleteCheckOptions o;
  o.coverage = SamplePlan{SampleStrategy::random, {}, 200, 4};
  const CheckReport with_inv = check_complete_slicing(r.complete(true), r.z, {SampleStrategy::random, {}, 100, 0}, o);
  EXPECT_TRUE(with_inv.pass);
  EXPECT_LE(with_inv.max, 1e-10);
  EXPECT_LE(with_inv.metrics.at("inverse_roundtrip_max"), 1e-8);
  // Bounds only shape sampling, so the family reaches all of P minus the origin.
  EXPECT_EQ(with_inv.metrics.at("coverage_fraction"), 1.0);

  const CheckReport newton = check_complete_slicing(r.complete(false), r.z, {SampleStrategy::random, {}, 100, 0}, o);
  EXPECT_TRUE(newton.pass);
  EXPECT_DOUBLE_EQ(newton.metrics.at("coverage_fraction"), with_inv.metrics.at("coverage_fraction"));
}

TEST(Complete, PlaneFamilyHasNoCoverage) {
  auto r3 = space("R3", {"x", "y", "z"});
  r3->set_bounds({{-1, 1}, {-1, 1}, {-1, 1}});
  auto m = space("M", {"s"});
  auto n = space("N", {"c"});
  auto mn = product_space("MxN", *m, *n);
  const CompleteSlicing cs(m, n, SmoothMap::parse("abar", mn, r3, {"s", "c", "0"}));
  CompleteCheckOptions o;
  o.coverage = SamplePlan{SampleStrategy::random, {}, 100, 0};
  const CheckReport rep = check_complete_slicing(cs, VectorField::parse("d/dx", r3, {"1", "0", "0"}),
                                                 {SampleStrategy::random, {}, 50, 0}, o);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.metrics.at("coverage_fraction"), 0.0);
}

TEST(Complete, SliceMatchesFamily) {
  Radial r;
  const Slicing s = r.complete(true).slice(vec({1.1}));
  EXPECT_LE((s.map(vec({0.5})) - std::exp(0.5) * vec({std::cos(1.1), std::sin(1.1)})).norm(), 1e-15);
  ASSERT_TRUE(s.field.has_value());
  EXPECT_EQ((*s.field)(vec({0.5}))[0], 1.0);
}

TEST(ConstantFromComplete, RadialAngle) {
  Radial r;
  const DynamicalSystem sys(r.p, r.z);
  const auto out = constant_from_complete(r.complete(true), sys, {SampleStrategy::random, {}, 100, 0});
  EXPECT_TRUE(out.constant.has_expressions());
  EXPECT_TRUE(out.report.pass);
  EXPECT_NEAR(out.constant(vec({0.0, 2.0}))[0], M_PI / 2, 1e-15);

  ConstantCheckOptions o;
  o.horizon = 0.5;
  o.checkpoints = 5;
  const auto numeric = constant_from_complete(r.complete(false), sys, {SampleStrategy::random, {}, 8, 0}, o);
  EXPECT_FALSE(numeric.constant.has_expressions());
  EXPECT_TRUE(numeric.report.pass) << numeric.report.max;
}

TEST(ConstantFromComplete, HeisenbergLevelSets) {
  const DynamicalSystem sys = heisenberg();
  auto m = space("S1", {"phi"});
  m->set_period(0, kTwoPi);
  m->set_bounds({{0, kTwoPi}});
  auto n = space("N", {"r", "c"});
  n->add_constraint("r > 0");
  n->add_constraint("c^2 > 0");
  n->set_bounds({{0.1, 2}, {-2, 2}});
  auto mn = product_space("MxN", *m, *n);
  const CompleteSlicing cs(m, n, SmoothMap::parse("abar", mn, sys.space, {"r*cos(phi)", "r*sin(phi)", "c"}),
                           SmoothMap::parse("inv", sys.space, mn, {"atan2(y, x)", "sqrt(x^2 + y^2)", "z"}),
                           SmoothMap::parse("X", mn, m, {"c^2"}));
  EXPECT_TRUE(check_complete_slicing(cs, sys.field, {SampleStrategy::random, {}, 100, 0}).pass);
  const auto out = constant_from_complete(cs, sys, {SampleStrategy::random, {}, 100, 0});
  EXPECT_TRUE(out.report.pass);
  const Vector f = out.constant(vec({0.6, 0.8, -1.5}));
  EXPECT_NEAR(f[0], 1.0, 1e-15);
  EXPECT_EQ(f[1], -1.5);
}

TEST(Straighten, LineFieldIsAlreadyStraight) {
  auto r3 = space("R3", {"x", "y", "z"});
  const DynamicalSystem sys(r3, VectorField::parse("d/dx", r3, {"1", "0", "0"}));
  auto uv = space("UV", {"u", "v"});
  const SmoothMap tr = SmoothMap::parse("tr", uv, r3, {"0", "u", "v"});
  StraightenOptions o;
  o.t_min = -0.5;
  o.t_max = 0.5;
  const CompleteSlicing cs = straighten_local(sys, tr, {SampleStrategy::grid, {}, 9, 0}, o);
  EXPECT_EQ(cs.product()->coordinates()[0], "t");
  EXPECT_LE((cs.family(vec({0.37, -1.0, 0.0})) - vec({0.37, -1.0, 0.0})).norm(), 1e-12);  // cached
  EXPECT_LE((cs.family(vec({-0.21, 0.3, 0.7})) - vec({-0.21, 0.3, 0.7})).norm(), 1e-12);  // fresh
}

TEST(Straighten, RadialRecoversExponentialFamily) {
  Radial r;
  const DynamicalSystem sys(r.p, r.z);
  const SmoothMap tr = SmoothMap::parse("circle", r.n, r.p, {"cos(u)", "sin(u)"});
  StraightenOptions o;
  o.t_min = -0.5;
  o.t_max = 0.5;
  const SamplePlan plan{SampleStrategy::random, {}, 10, 0};
  const CompleteSlicing cs = straighten_local(sys, tr, plan, o);
  const auto cached = generate_samples(plan, *r.n);
  for (double t : {-0.5, -0.1234, 0.0, 0.2718, 0.5}) {
    for (double u : {cached[0][0], 0.3, 4.0}) {
      const Vector expect = std::exp(t) * vec({std::cos(u), std::sin(u)});
      EXPECT_LE((cs.family(vec({t, u})) - expect).norm(), 1e-9) << t << ' ' << u;
    }
  }
  const CheckReport rep = check_complete_slicing(cs, r.z, {SampleStrategy::random, {}, 20, 0}, {1e-9, {}, {}});
  EXPECT_TRUE(rep.pass) << rep.max;
}

TEST(Straighten, HypothesisViolations) {
  auto r2 = space("R2", {"x", "y"});
  auto s = space("S", {"s"});
  s->set_bounds({{-1, 1}});
  const SmoothMap tr = SmoothMap::parse("axis", s, r2, {"s", "0"});
  const DynamicalSystem shear(r2, VectorField::parse("shear", r2, {"0", "x"}));
  EXPECT_THROW(straighten_local(shear, tr, {SampleStrategy::grid, {}, 3, 0}), CriticalPoint);
  const DynamicalSystem along(r2, VectorField::parse("d/dx", r2, {"1", "0"}));
  EXPECT_THROW(straighten_local(along, tr, {SampleStrategy::grid, {}, 3, 0}), TransversalityFailure);
}

TEST(Gauge, ScalingHalvesTheField) {
  Radial r;
  const Slicing ray{SmoothMap::parse("alpha", r.m, r.p, {"exp(x)*0.6", "exp(x)*0.8"}), VectorField::parse("X", r.m, {"1"})};
  auto mp = space("M2", {"w"});
  const SmoothMap phi = SmoothMap::parse("phi", mp, r.m, {"2*w"});
  const SmoothMap phi_inv = SmoothMap::parse("phi_inv", r.m, mp, {"x/2"});
  const Slicing g = gauge_transform(ray, r.z, phi, phi_inv, {vec({0.1}), vec({-0.3})});
  EXPECT_DOUBLE_EQ((*g.field)(vec({0.25}))[0], 0.5);
  EXPECT_LE(slicing_residual(g, r.z, vec({0.25})).norm(), 1e-14);

  const Slicing same = gauge_transform(ray, r.z, SmoothMap::identity(r.m), SmoothMap::identity(r.m), {vec({0.0})});
  EXPECT_EQ(same.map(vec({0.4})), ray.map(vec({0.4})));
  EXPECT_EQ((*same.field)(vec({0.4})), (*ray.field)(vec({0.4})));

  EXPECT_THROW(gauge_transform(ray, r.z, SmoothMap::parse("cube", mp, r.m, {"w^3"}), std::nullopt, {vec({0.0})}),
               SingularMatrix);
  EXPECT_THROW(gauge_transform(ray, r.z, phi, SmoothMap::identity(r.m), {vec({0.1})}), std::invalid_argument);
}

TEST(Property, GaugeInvariantResidualOnNonSlicing) {
  auto p = space("R2", {"x", "y"});
  const VectorField z = VectorField::parse("limit", p, {"-y + x*(1 - x^2 - y^2)", "x + y*(1 - x^2 - y^2)"});
  auto m = space("M", {"s"});
  m->set_bounds({{0.2, 2.0}});
  const Slicing circle{SmoothMap::parse("r2", m, p, {"2*cos(s)", "2*sin(s)"}), VectorField::parse("X", m, {"1"})};
  const SmoothMap phi = SmoothMap::parse("phi", m, m, {"s + s^3/5"});
  const Slicing moved = gauge_transform(circle, z, phi, std::nullopt, {});
  const auto samples = generate_samples({SampleStrategy::random, {}, 50, 3}, *m);
  std::vector<Vector> images;
  for (const auto& s : samples) images.push_back(phi(s));
  const CheckReport a = check_slicing(circle, z, images);
  const CheckReport b = check_slicing(moved, z, samples);
  EXPECT_EQ(a.pass, b.pass);
  EXPECT_FALSE(a.pass);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_NEAR(a.samples[i].residual, b.samples[i].residual, 1e-10);
  }
}

TEST(Export, CompleteCsvGrid) {
  Radial r;
  std::ostringstream out;
  write_complete_csv(out, r.complete(true), {SampleStrategy::grid, {}, 4, 0});
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "u,x,z1,z2");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

}  // namespace
}  // namespace slicekit
