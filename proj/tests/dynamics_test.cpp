#include "slicekit/dynamics.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

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

DynamicalSystem heisenberg() {
  auto p = space("P", {"x", "y", "z"});
  p->add_constraint("z^2 > 0");
  p->add_constraint("x^2 + y^2 > 0");
  p->set_bounds({{-2, 2}, {-2, 2}, {-2, 2}});
  return {p, VectorField::parse("Z", p, {"-z^2*y", "z^2*x", "0"})};
}

DynamicalSystem radial() {
  auto p = space("P", {"z1", "z2"});
  p->add_constraint("z1^2 + z2^2 > 0");
  p->set_bounds({{-2, 2}, {-2, 2}});
  return {p, VectorField::parse("Z", p, {"z1", "z2"})};
}

TEST(Integrate, LineFieldIsExact) {
  auto p = space("R3", {"x", "y", "z"});
  const DynamicalSystem sys(p, VectorField::parse("Z", p, {"1", "0", "0"}));
  for (Method m : {Method::rk4, Method::rk45}) {
    IntegrationOptions o;
    o.method = m;
    const Trajectory t = integrate(sys, vec({0, 1, 2}), 1.0, o);
    EXPECT_LE((t.points.back() - vec({1, 1, 2})).norm(), 1e-10);
    EXPECT_DOUBLE_EQ(t.times.back(), 1.0);
    for (std::size_t i = 1; i < t.times.size(); ++i) EXPECT_LT(t.times[i - 1], t.times[i]);
  }
}

TEST(Integrate, RadialClosedForm) {
  const DynamicalSystem sys = radial();
  IntegrationOptions o;
  o.tolerance = 1e-10;
  const Trajectory fwd = integrate(sys, vec({1, 0}), 1.0, o);
  EXPECT_LE((fwd.points.back() - vec({std::exp(1.0), 0.0})).norm(), 1e-8);
  EXPECT_LE(fwd.max_error_estimate, 1e-10 * (1 + std::exp(1.0)));
  const Trajectory back = integrate(sys, vec({1, 0}), -1.0, o);
  EXPECT_DOUBLE_EQ(back.times.front(), -1.0);
  EXPECT_DOUBLE_EQ(back.times.back(), 0.0);
  EXPECT_LE((back.points.front() - vec({std::exp(-1.0), 0.0})).norm(), 1e-8);
}

TEST(Integrate, ZeroFieldAndDomainExit) {
  auto p = space("R2", {"a", "b"});
  const DynamicalSystem still(p, VectorField::zero(p));
  const Trajectory t = integrate(still, vec({0.3, 0.4}), 2.0);
  for (const auto& x : t.points) EXPECT_EQ((x - vec({0.3, 0.4})).norm(), 0.0);

  auto half = space("H", {"x"});
  half->add_constraint("x > 0");
  const DynamicalSystem leaving(half, VectorField::parse("Z", half, {"-1"}));
  const Trajectory cut = integrate(leaving, vec({0.5}), 1.0);
  EXPECT_TRUE(cut.truncated);
  EXPECT_LT(cut.times.back(), 0.5 + 1e-9);
  EXPECT_GT(cut.points.back()[0], 0.0);
}

TEST(Integrate, CheckpointsAndCsv) {
  const DynamicalSystem sys = radial();
  IntegrationOptions o;
  o.checkpoints = {0.0, 0.5, 1.0};
  const Trajectory t = integrate(sys, vec({1, 1}), 1.0, o);
  ASSERT_EQ(t.times.size(), 3u);
  EXPECT_NEAR(t.points[1][0], std::exp(0.5), 1e-8);
  std::ostringstream csv;
  write_trajectory_csv(csv, t, *sys.space);
  EXPECT_EQ(csv.str().substr(0, 9), "t,z1,z2\n0");
}

TEST(Integrate, PeriodicCoordinatesStayCanonical) {
  auto torus = space("T", {"x", "y"});
  torus->set_period(0, 2 * M_PI);
  torus->set_period(1, 2 * M_PI);
  const DynamicalSystem sys(torus, VectorField::parse("Z", torus, {"1", "1.4142135623730951"}));
  const Trajectory t = integrate(sys, vec({0.1, 0.1}), 20.0);
  for (const auto& x : t.points) {
    EXPECT_GE(x[0], 0.0);
    EXPECT_LT(x[0], 2 * M_PI);
  }
}

TEST(LieDerivative, HeisenbergConstants) {
  const DynamicalSystem sys = heisenberg();
  const auto& vars = sys.space->coordinates();
  const auto samples = generate_samples({SampleStrategy::random, {}, 100, 3}, *sys.space);
  for (const auto& x : samples) {
    EXPECT_NEAR(lie_derivative(sys.field, Expression::parse("x^2 + y^2", vars), x), 0.0, 1e-12);
    EXPECT_EQ(lie_derivative(sys.field, Expression::parse("z", vars), x), 0.0);
    EXPECT_EQ(lie_derivative(sys.field, Expression::parse("4.5", vars), x), 0.0);
  }
}

TEST(SamplePlan, ReproducibleAndInDomain) {
  const DynamicalSystem sys = radial();
  const SamplePlan plan{SampleStrategy::random, {}, 50, 42};
  const auto a = generate_samples(plan, *sys.space);
  const auto b = generate_samples(plan, *sys.space);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  const auto grid = generate_samples({SampleStrategy::grid, {}, 25, 0}, *sys.space);
  EXPECT_EQ(grid.size(), 24u);  // 5x5 nodes minus the excluded origin
}

TEST(ConstantOfMotion, RadialUnitVector) {
  const DynamicalSystem sys = radial();
  auto n = space("N", {"n1", "n2"});
  const SmoothMap f = SmoothMap::parse("F", sys.space, n, {"z1/sqrt(z1^2 + z2^2)", "z2/sqrt(z1^2 + z2^2)"});
  const SamplePlan plan{SampleStrategy::random, {}, 100, 0};
  const CheckReport inf = check_constant_of_motion(sys, f, plan, ConstantMode::infinitesimal);
  EXPECT_TRUE(inf.pass);
  EXPECT_LE(inf.max, 1e-10);
  ConstantCheckOptions o;
  o.horizon = 5.0;
  const CheckReport integ = check_constant_of_motion(sys, f, {SampleStrategy::random, {}, 20, 0}, ConstantMode::integral, o);
  EXPECT_TRUE(integ.pass);
  EXPECT_LE(integ.max, 1e-8);
}

TEST(ConstantOfMotion, HeisenbergBothModes) {
  const DynamicalSystem sys = heisenberg();
  auto n = space("N", {"a", "b"});
  const SmoothMap f = SmoothMap::parse("F", sys.space, n, {"x^2 + y^2", "z"});
  EXPECT_TRUE(check_constant_of_motion(sys, f, {SampleStrategy::random, {}, 100, 1}, ConstantMode::infinitesimal).pass);
  const CheckReport integ = check_constant_of_motion(sys, f, {SampleStrategy::random, {}, 10, 1}, ConstantMode::integral);
  EXPECT_TRUE(integ.pass) << integ.max;
  EXPECT_LE(integ.max, 1e-6);
}

TEST(ConstantOfMotion, NonConstantFails) {
  auto p = space("R2", {"x", "y"});
  const DynamicalSystem sys(p, VectorField::parse("Z", p, {"1", "1"}));
  auto n = space("N", {"c"});
  const CheckReport r = check_constant_of_motion(sys, SmoothMap::parse("F", p, n, {"y"}), {SampleStrategy::random, {}, 20, 0},
                                                 ConstantMode::infinitesimal);
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.max, 1.0);
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_EQ(r.offending.size(), CheckReport::kMaxOffending);
}

TEST(Tangency, LineFieldExamples) {
  auto p = space("R3", {"x", "y", "z"});
  const VectorField z = VectorField::parse("Z", p, {"1", "0", "0"});
  auto line = space("L", {"v"});
  const TangencyReport beta = check_tangency(z, SmoothMap::parse("beta", line, p, {"0", "v", "0"}), {SampleStrategy::random, {}, 10, 0});
  EXPECT_FALSE(beta.report.pass);
  EXPECT_NEAR(beta.report.max, 1.0, 1e-14);

  auto uv = space("UV", {"u", "v"});
  const TangencyReport alpha = check_tangency(z, SmoothMap::parse("alpha", uv, p, {"u", "v", "0"}), {SampleStrategy::random, {}, 10, 0});
  EXPECT_TRUE(alpha.report.pass);
  for (const auto& v : alpha.fields) EXPECT_LE((v - vec({1, 0})).norm(), 1e-14);

  auto t = space("I", {"t"});
  const TangencyReport curve = check_tangency(z, SmoothMap::parse("curve", t, p, {"t", "1", "2"}), {SampleStrategy::random, {}, 10, 0});
  EXPECT_TRUE(curve.report.pass);
  for (const auto& v : curve.fields) EXPECT_NEAR(v[0], 1.0, 1e-14);

  // Non-immersion is flagged per sample.
  const TangencyReport flat = check_tangency(z, SmoothMap::parse("flat", uv, p, {"u", "u", "0"}), {SampleStrategy::random, {}, 5, 0});
  EXPECT_FALSE(flat.report.pass);
  EXPECT_FALSE(flat.report.samples.front().error.empty());
}

TEST(Tangency, LimitCycleCircles) {
  auto p = space("R2", {"x", "y"});
  const VectorField z = VectorField::parse("Z", p, {"-y + x*(1 - x^2 - y^2)", "x + y*(1 - x^2 - y^2)"});
  auto circle = space("S1", {"phi"});
  circle->set_period(0, 2 * M_PI);
  circle->set_bounds({{0, 2 * M_PI}});
  const SamplePlan plan{SampleStrategy::random, {}, 50, 0};
  EXPECT_TRUE(check_tangency(z, SmoothMap::parse("unit", circle, p, {"cos(phi)", "sin(phi)"}), plan).report.pass);
  EXPECT_FALSE(check_tangency(z, SmoothMap::parse("two", circle, p, {"2*cos(phi)", "2*sin(phi)"}), plan).report.pass);
}

TEST(Tangency, GaugeInvariantResidual) {
  auto p = space("R2", {"x", "y"});
  const VectorField z = VectorField::parse("Z", p, {"-y + x*(1 - x^2 - y^2)", "x + y*(1 - x^2 - y^2)"});
  auto m = space("M", {"s"});
  m->set_bounds({{0.1, 2.0}});
  const SmoothMap alpha = SmoothMap::parse("alpha", m, p, {"1.5*cos(s)", "1.5*sin(s)"});
  const SmoothMap phi = SmoothMap::parse("phi", m, m, {"s^3/4 + s"});
  const SmoothMap moved = compose(alpha, phi);
  const auto samples = generate_samples({SampleStrategy::random, {}, 30, 9}, *m);
  std::vector<Vector> images;
  for (const auto& s : samples) images.push_back(phi(s));
  const TangencyReport a = check_tangency(z, alpha, images);
  const TangencyReport b = check_tangency(z, moved, samples);
  EXPECT_EQ(a.report.pass, b.report.pass);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_NEAR(a.report.samples[i].residual, b.report.samples[i].residual, 1e-10);
  }
}

}  // namespace
}  // namespace slicekit
