#include "slicekit/symplectic.hpp"

#include <cmath>
#include <random>

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

SymplecticSystem system_on(const SpaceRef& p, const std::string& h, bool interleaved = false) {
  return SymplecticSystem("sys", BilinearFormField::canonical(p, interleaved), Expression::parse(h, p->coordinates()));
}

struct DoubleOscillator {
  std::shared_ptr<CoordinateSpace> p = space("T*R2", {"x", "px", "y", "py"});
  std::shared_ptr<CoordinateSpace> m = space("R", {"x"});
  SymplecticSystem sys = system_on(p, "(x^2 + px^2 + y^2 + py^2)/2", true);
  FibredStructure fib{SmoothMap::parse("pr1", p, m, {"x"}), 1};
  SmoothMap alpha = SmoothMap::parse("alpha", m, p, {"x", "x", "sqrt(1 - x^2)", "sqrt(1 - x^2)"});

  DoubleOscillator() {
    p->set_bounds({{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}});
    m->add_constraint("1 - x^2 > 0");
    m->set_bounds({{-0.9, 0.9}});
  }
};

struct FreeParticle {
  std::shared_ptr<CoordinateSpace> p = space("T*R2", {"q1", "q2", "p1", "p2"});
  std::shared_ptr<CoordinateSpace> q = space("R2", {"q1", "q2"});
  SymplecticSystem sys = system_on(p, "(p1^2 + p2^2)/2");
  FibredStructure fib{SmoothMap::parse("pi", p, q, {"q1", "q2"}), 2};

  FreeParticle() {
    p->set_bounds({{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}});
    q->set_bounds({{-1, 1}, {-1, 1}});
  }
};

TEST(HamiltonianField, DoubleOscillatorClosedForm) {
  DoubleOscillator d;
  const VectorField z = hamiltonian_vector_field(d.sys);
  for (const auto& x : generate_samples({SampleStrategy::random, {}, 50, 0}, *d.p)) {
    EXPECT_LE((z(x) - vec({x[1], -x[0], x[3], -x[2]})).norm(), 1e-15);
  }
  EXPECT_EQ(hamiltonian_vector_field(system_on(d.p, "3.5", true))(vec({1, 2, 3, 4})).norm(), 0.0);
}

TEST(HamiltonianField, OscillatorConservesEnergy) {
  auto p = space("T*R", {"q", "p"});
  p->set_bounds({{-3, 3}, {-3, 3}});
  const SymplecticSystem sys = system_on(p, "(q^2 + p^2)/2");
  const VectorField z = hamiltonian_vector_field(sys);
  EXPECT_EQ(z(vec({0.3, 0.7})), vec({0.7, -0.3}));
  for (const auto& x : generate_samples({SampleStrategy::random, {}, 1000, 5}, *p)) {
    EXPECT_LE(std::abs(lie_derivative(z, sys.hamiltonian(), x)), 1e-10);
  }
}

TEST(HamiltonianField, PointDependentFormAndValidation) {
  auto p = space("P", {"q", "p"});
  const BilinearFormField w = BilinearFormField::parse("w", p, FormKind::symplectic, {{"0", "1 + q^2"}, {"-1 - q^2", "0"}});
  const SymplecticSystem sys("scaled", w, Expression::parse("q*p", p->coordinates()));
  EXPECT_NO_THROW(sys.validate({vec({0.4, 1.0})}));
  // Z = (dH/dp, -dH/dq) / (1 + q^2).
  EXPECT_LE((hamiltonian_vector_field(sys)(vec({0.5, 2.0})) - vec({0.5, -2.0}) / 1.25).norm(), 1e-15);

  auto r4 = space("R4", {"a", "b", "c", "d"});
  const BilinearFormField open = BilinearFormField::parse(
      "open", r4, FormKind::symplectic, {{"0", "1", "0", "0"}, {"-1", "0", "0", "0"}, {"0", "0", "0", "1 + a"}, {"0", "0", "-1 - a", "0"}});
  const SymplecticSystem bad("bad", open, Expression::parse("a", r4->coordinates()));
  EXPECT_DOUBLE_EQ(bad.closedness_defect(vec({0.1, 0.2, 0.3, 0.4})), 1.0);
  EXPECT_THROW(bad.validate({vec({0.1, 0.2, 0.3, 0.4})}), std::invalid_argument);

  const BilinearFormField degenerate = BilinearFormField::parse("deg", p, FormKind::symplectic, {{"0", "q"}, {"-q", "0"}});
  EXPECT_THROW(SymplecticSystem("d", degenerate, Expression::parse("p", p->coordinates())).validate({vec({0.0, 1.0})}),
               std::invalid_argument);
  EXPECT_THROW(SymplecticSystem("odd", BilinearFormField::parse("o", space("L", {"s"}), FormKind::symplectic, {{"0"}}),
                                Expression::constant(0.0, {"s"})),
               std::invalid_argument);
}

TEST(HjResidual, SlicingAndOneWayCounterexample) {
  auto p = space("T*R", {"q", "p"});
  const SymplecticSystem sys = system_on(p, "(q^2 + p^2)/2");
  auto t = space("I", {"t"});
  const VectorField one = VectorField::parse("X", t, {"1"});
  // Integral curve: slicing, so hj = 0.
  const SmoothMap curve = SmoothMap::parse("flow", t, p, {"cos(t)", "-sin(t)"});
  // Same circle traversed twice as fast: H o alpha constant, not a slicing.
  const SmoothMap fast = SmoothMap::parse("fast", t, p, {"cos(2*t)", "-sin(2*t)"});
  const VectorField z = hamiltonian_vector_field(sys);
  for (double s : {-1.0, 0.0, 0.4, 2.5}) {
    EXPECT_LE(hj_residual(sys, curve, one, vec({s})).norm(), 1e-15);
    EXPECT_LE(hj_residual(sys, fast, one, vec({s})).norm(), 1e-12);
    EXPECT_NEAR(slicing_residual(Slicing{fast, one}, z, vec({s})).norm(), 1.0, 1e-14);
  }
  EXPECT_EQ(hj_residual(sys, fast, VectorField::zero(t), vec({0.3})).norm(), 0.0);
}

TEST(Property, FactorizationThroughSlicingResidual) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto num = [&] { return format_real(std::round(u(rng) * 100) / 100); };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    std::vector<std::string> pc;
    for (int i = 0; i < 2 * n; ++i) pc.push_back("z" + std::to_string(i));
    auto p = space("P", pc);
    const int m = 1 + static_cast<int>(rng() % (2 * n));
    std::vector<std::string> mc;
    for (int i = 0; i < m; ++i) mc.push_back("x" + std::to_string(i));
    auto base = space("M", mc);
    // Omega = canonical + small point-dependent skew part (not necessarily closed; the identity is algebraic).
    std::vector<std::vector<std::string>> rows(2 * n, std::vector<std::string>(2 * n, "0"));
    const Matrix c = BilinearFormField::canonical(p)(Vector::Zero(2 * n));
    for (int i = 0; i < 2 * n; ++i) {
      for (int j = i + 1; j < 2 * n; ++j) {
        const std::string e = format_real(c(i, j)) + " + " + num() + "*sin(z" + std::to_string(rng() % (2 * n)) + ")/4";
        rows[i][j] = e;
        rows[j][i] = "-(" + e + ")";
      }
    }
    const SymplecticSystem sys("rand", BilinearFormField::parse("w", p, FormKind::symplectic, rows),
                               Expression::parse(num() + "*z0^2 + " + num() + "*z0*z" + std::to_string(2 * n - 1) + " + cos(z" +
                                                     std::to_string(rng() % (2 * n)) + ")",
                                                 pc));
    std::vector<std::string> comps;
    for (int k = 0; k < 2 * n; ++k) {
      comps.push_back(num() + "*x" + std::to_string(rng() % m) + " + " + num() + "*x" + std::to_string(rng() % m) + "^2");
    }
    const SmoothMap alpha = SmoothMap::parse("alpha", base, p, comps);
    std::vector<std::string> xc;
    for (int i = 0; i < m; ++i) xc.push_back(num() + " + " + num() + "*x" + std::to_string(rng() % m));
    const VectorField xf = VectorField::parse("X", base, xc);
    Vector x(m);
    for (int i = 0; i < m; ++i) x[i] = u(rng);
    const Vector r = slicing_residual(Slicing{alpha, xf}, hamiltonian_vector_field(sys), x);
    const Matrix j = jacobian(alpha, x);
    const Vector lhs = j.transpose() * sys.omega()(alpha(x)).transpose() * r;
    EXPECT_LE((lhs - hj_residual(sys, alpha, xf, x)).norm(), 1e-10);
  }
}

TEST(Classify, WorkedCases) {
  DoubleOscillator d;
  auto t = space("I", {"t"});
  const SamplePlan plan{SampleStrategy::random, {}, 20, 0};
  EXPECT_EQ(classify_submanifold(d.sys, SmoothMap::parse("c", t, d.p, {"t", "t^2", "sin(t)", "1"}), plan).kind,
            SubmanifoldKind::isotropic);

  auto p2 = space("T*R", {"q", "p"});
  const SymplecticSystem osc = system_on(p2, "(q^2 + p^2)/2");
  EXPECT_EQ(classify_submanifold(osc, SmoothMap::parse("level", t, p2, {"t", "0.7"}), plan).kind,
            SubmanifoldKind::lagrangian);

  FreeParticle f;
  auto fibre = space("F", {"a", "b"});
  const Classification cot = classify_submanifold(f.sys, SmoothMap::parse("fibre", fibre, f.p, {"0.3", "-0.2", "a", "b"}), plan);
  EXPECT_TRUE(cot.isotropic);
  EXPECT_EQ(cot.kind, SubmanifoldKind::lagrangian);

  auto uv = space("UV", {"u", "v"});
  const Classification tilted = classify_submanifold(d.sys, SmoothMap::parse("tilted", uv, d.p, {"u", "v", "0", "0"}), plan);
  EXPECT_EQ(tilted.kind, SubmanifoldKind::none);
  EXPECT_NEAR(tilted.report.max, 1.0, 1e-15);

  auto h3 = space("H3", {"a", "b", "c"});
  EXPECT_EQ(classify_submanifold(d.sys, SmoothMap::parse("hyper", h3, d.p, {"a", "b", "c", "a*b"}), plan).kind,
            SubmanifoldKind::coisotropic);
  EXPECT_THROW(classify_submanifold(d.sys, SmoothMap::parse("flat", uv, d.p, {"u", "u", "0", "0"}), plan),
               PreconditionError);
}

TEST(LagrangianSlicing, VerdictsAndPrecondition) {
  auto p = space("T*R", {"q", "p"});
  auto line = space("Q", {"q"});
  line->set_bounds({{-1, 1}});
  const SamplePlan plan{SampleStrategy::random, {}, 20, 0};
  const SmoothMap level = SmoothMap::parse("p=c", line, p, {"q", "0.4"});
  const CheckReport straight = check_lagrangian_slicing(system_on(p, "p"), level, plan);
  EXPECT_TRUE(straight.pass);
  EXPECT_EQ(straight.metrics.at("cross_check_agrees"), 1.0);

  const CheckReport osc = check_lagrangian_slicing(system_on(p, "(q^2 + p^2)/2"), level, plan);
  EXPECT_FALSE(osc.pass);
  for (const auto& s : osc.samples) EXPECT_NEAR(s.residual, std::abs(s.point[0]), 1e-15);
  EXPECT_EQ(osc.metrics.at("cross_check_agrees"), 1.0);

  DoubleOscillator d;
  auto uv = space("UV", {"u", "v"});
  EXPECT_THROW(check_lagrangian_slicing(d.sys, SmoothMap::parse("tilted", uv, d.p, {"u", "v", "0", "0"}), plan),
               PreconditionError);
}

TEST(FibreIsotropy, Cases) {
  const SamplePlan plan{SampleStrategy::random, {}, 30, 0};
  FreeParticle f;
  EXPECT_TRUE(check_fibre_isotropy(f.fib, f.sys, plan).pass);
  DoubleOscillator d;
  const CheckReport three = check_fibre_isotropy(d.fib, d.sys, plan);
  EXPECT_FALSE(three.pass);
  EXPECT_EQ(three.max, 1.0);
  auto p = space("T*R", {"q", "p"});
  p->set_bounds({{-1, 1}, {-1, 1}});
  auto line = space("Q", {"q"});
  EXPECT_TRUE(check_fibre_isotropy(FibredStructure(SmoothMap::parse("tau", p, line, {"q"}), 1), system_on(p, "p^2"), plan).pass);
}

TEST(FibredHj, Cases) {
  const SamplePlan plan{SampleStrategy::random, {}, 30, 0};
  FreeParticle f;
  const SmoothMap dw = SmoothMap::parse("dW", f.q, f.p, {"q1", "q2", "0.5", "-0.25"});
  const CheckReport ok = fibred_hj_check(f.fib, f.sys, dw, plan);
  EXPECT_TRUE(ok.pass);
  EXPECT_EQ(ok.metrics.at("verdicts_agree"), 1.0);

  const SmoothMap bent = SmoothMap::parse("bent", f.q, f.p, {"q1", "q2", "q1", "q2^2"});
  const CheckReport no = fibred_hj_check(f.fib, f.sys, bent, plan);
  EXPECT_FALSE(no.pass);
  EXPECT_EQ(no.metrics.at("verdicts_agree"), 1.0);

  const SymplecticSystem still("still", BilinearFormField::canonical(f.p), Expression::constant(2.0, f.p->coordinates()));
  EXPECT_TRUE(fibred_hj_check(f.fib, still, bent, plan).pass);

  DoubleOscillator d;
  EXPECT_THROW(fibred_hj_check(d.fib, d.sys, d.alpha, plan), PreconditionError);
}

TEST(VerticalBlock, Cases) {
  FreeParticle f;
  const SmoothMap bent = SmoothMap::parse("bent", f.q, f.p, {"q1", "q2", "q1*q2", "q2^2"});
  const VerticalBlock canon = vertical_block(f.fib, f.sys, bent, vec({0.3, -0.4}));
  EXPECT_EQ(canon.block, -Matrix::Identity(2, 2));
  EXPECT_TRUE(canon.injective);

  DoubleOscillator d;
  for (const auto& x : generate_samples({SampleStrategy::random, {}, 100, 2}, *d.m)) {
    const VerticalBlock b = vertical_block(d.fib, d.sys, d.alpha, x);
    EXPECT_EQ(b.block.rows(), 1);
    EXPECT_EQ(b.block.cols(), 3);
    EXPECT_FALSE(b.injective);
  }
  const FibredStructure generic(SmoothMap::parse("pi", f.p, f.q, {"q1", "q2"}));
  EXPECT_THROW(vertical_block(generic, f.sys, bent, vec({0.1, 0.1})), PreconditionError);
}

TEST(Involution, CanonicalPairs) {
  FreeParticle f;
  const auto& c = f.p->coordinates();
  const SamplePlan plan{SampleStrategy::random, {}, 20, 0};
  EXPECT_TRUE(involution_check(f.sys, {Expression::parse("p1", c), Expression::parse("p2", c)}, plan).pass);
  const CheckReport conj = involution_check(f.sys, {Expression::parse("q1", c), Expression::parse("p1", c)}, plan);
  EXPECT_FALSE(conj.pass);
  EXPECT_DOUBLE_EQ(conj.max, 1.0);
  EXPECT_THROW(involution_check(f.sys, {Expression::parse("q1", c)}, plan), std::invalid_argument);
}

TEST(ClassicalHj, Examples) {
  FreeParticle f;
  const auto& c = f.p->coordinates();
  const CheckReport lin = classical_hj_check(f.sys, f.q, Expression::parse("0.6*q1 - 1.1*q2", c), {SampleStrategy::random, {}, 40, 0});
  EXPECT_TRUE(lin.pass);
  EXPECT_NEAR(lin.metrics.at("energy_min"), 0.5 * (0.36 + 1.21), 1e-15);
  EXPECT_EQ(lin.metrics.at("spread"), 0.0);
  EXPECT_THROW(classical_hj_check(f.sys, f.q, Expression::parse("q1*p1", c), {}), std::invalid_argument);

  auto p = space("T*R", {"q", "p"});
  auto q = space("Q", {"q"});
  q->add_constraint("1 - q^2 > 0");
  q->set_bounds({{-0.99, 0.99}});
  const SymplecticSystem osc = system_on(p, "(q^2 + p^2)/2");
  // E = 1/2: dW/dq = sqrt(1 - q^2).
  const Expression w = Expression::parse("(q*sqrt(1 - q^2) + atan2(q, sqrt(1 - q^2)))/2", p->coordinates());
  const CheckReport arc = classical_hj_check(osc, q, w, {SampleStrategy::random, {}, 100, 0});
  EXPECT_TRUE(arc.pass) << arc.max;
  EXPECT_LE(arc.metrics.at("spread"), 1e-10);
  EXPECT_NEAR(arc.metrics.at("energy_min"), 0.5, 1e-10);
  const SmoothMap dw = exact_section(osc, q, w);
  EXPECT_NEAR(dw(vec({0.6}))[1], 0.8, 1e-15);

  EXPECT_FALSE(classical_hj_check(osc, q, Expression::parse("q^2", p->coordinates()), {SampleStrategy::random, {}, 20, 0}).pass);
}

// Random polynomial sections q -> (q, P(q)) of the free particle.
SmoothMap polynomial_section(const FreeParticle& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const bool constant = rng() % 4 == 0;
  auto coef = [&](bool allowed) { return allowed && rng() % 2 == 0 ? format_real(std::round(u(rng) * 8) / 8) : "0"; };
  std::vector<std::string> comps{"q1", "q2"};
  for (int k = 0; k < 2; ++k) {
    comps.push_back(coef(true) + " + " + coef(!constant) + "*q1 + " + coef(!constant) + "*q2 + " + coef(!constant) +
                    "*q1*q2 + " + coef(!constant) + "*q1^2");
  }
  return SmoothMap::parse("P", f.q, f.p, comps);
}

TEST(Property, FibredVerdictMatchesHjVerdict) {
  FreeParticle f;
  std::mt19937_64 rng(6);
  int passes = 0;
  for (int i = 0; i < 200; ++i) {
    const SmoothMap section = polynomial_section(f, rng);
    const CheckReport r = fibred_hj_check(f.fib, f.sys, section, {SampleStrategy::random, {}, 10, static_cast<std::uint64_t>(i)});
    EXPECT_EQ(r.metrics.at("verdicts_agree"), 1.0);
    passes += r.pass;
  }
  EXPECT_GT(passes, 10);
  EXPECT_LT(passes, 190);
}

TEST(Property, LagrangianSectionsReduceToExactness) {
  FreeParticle f;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SamplePlan plan{SampleStrategy::random, {}, 10, 3};
  for (int i = 0; i < 50; ++i) {
    auto c = [&] { return format_real(std::round(u(rng) * 4) / 4); };
    const bool linear = i % 3 == 0;
    const std::string w = c() + "*q1 + " + c() + "*q2" + (linear ? "" : " + " + c() + "*q1*q2 + " + c() + "*q2^3");
    const SmoothMap section = exact_section(f.sys, f.q, Expression::parse(w, f.p->coordinates()));
    const CheckReport fibred = check_fibred_slicing(f.fib, section, hamiltonian_vector_field(f.sys), plan);
    const CheckReport exact = classical_hj_check(f.sys, f.q, Expression::parse(w, f.p->coordinates()), plan);
    EXPECT_EQ(fibred.pass, exact.pass) << w;
    EXPECT_LE(pullback_two_form(section, f.sys.omega(), vec({0.2, 0.3})).cwiseAbs().maxCoeff(), 1e-8);
  }
}

}  // namespace
}  // namespace slicekit
