#include "slicekit/expr.hpp"

#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

namespace slicekit {
namespace {

const std::vector<std::string> kXY{"x", "y"};
const std::vector<std::string> kXYZ{"x", "y", "z"};

TEST(Parse, PolynomialTree) {
  const Expression e = Expression::parse("x^2 + y^2", kXY);
  const Node& root = e.root();
  ASSERT_EQ(root.kind, NodeKind::add);
  ASSERT_EQ(root.args[0]->kind, NodeKind::pow);
  EXPECT_EQ(root.args[0]->args[0]->kind, NodeKind::variable);
  EXPECT_EQ(root.args[0]->args[0]->index, 0u);
  EXPECT_EQ(root.args[0]->args[1]->kind, NodeKind::constant);
  EXPECT_EQ(root.args[0]->args[1]->value, 2.0);
  ASSERT_EQ(root.args[1]->kind, NodeKind::pow);
  EXPECT_EQ(root.args[1]->args[0]->index, 1u);
}

TEST(Parse, HeisenbergHamiltonian) {
  const Expression h = Expression::parse("z*(x*x+y*y)/2", kXYZ);
  EXPECT_DOUBLE_EQ(h.evaluate(std::map<std::string, double>{{"x", 1}, {"y", 2}, {"z", 3}}), 7.5);
}

TEST(Parse, SyntaxErrorOffset) {
  try {
    Expression::parse("x + * y", kXY);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parse, UnknownIdentifierNamed) {
  try {
    Expression::parse("x + w", kXY);
    FAIL();
  } catch (const UnknownIdentifier& e) {
    EXPECT_EQ(e.name(), "w");
    EXPECT_EQ(e.offset(), 4u);
  }
  // Not on the whitelist.
  EXPECT_THROW(Expression::parse("asin(x)", kXY), UnknownIdentifier);
  EXPECT_THROW(Expression::parse("atan2(x)", kXY), ParseError);
  EXPECT_THROW(Expression::parse("", kXY), ParseError);
  EXPECT_THROW(Expression::parse("(x", kXY), ParseError);
}

TEST(Parse, PrecedenceAndAssociativity) {
  const std::map<std::string, double> at{{"x", 2.0}, {"y", 3.0}};
  EXPECT_DOUBLE_EQ(Expression::parse("-x^2", kXY).evaluate(at), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2", kXY).evaluate(at), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("x - y - 1", kXY).evaluate(at), -2.0);
  EXPECT_DOUBLE_EQ(Expression::parse("x / y * 3", kXY).evaluate(at), 2.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^-1", kXY).evaluate(at), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("x*-y", kXY).evaluate(at), -6.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e1 + 2E-1", kXY).evaluate(at), 15.2);
}

TEST(Evaluate, Basics) {
  EXPECT_DOUBLE_EQ(Expression::parse("x^2+y^2", kXY).evaluate(std::map<std::string, double>{{"x", 3}, {"y", 4}}), 25.0);
  EXPECT_DOUBLE_EQ(Expression::parse("exp(0)", {}).evaluate(std::map<std::string, double>{}), 1.0);
  EXPECT_NEAR(Expression::parse("atan2(y, x)", kXY).evaluate(std::map<std::string, double>{{"x", -1}, {"y", 0}}), M_PI, 1e-15);
}

TEST(Evaluate, DomainErrorsNameTheSubexpression) {
  const Expression e = Expression::parse("1 + sqrt(x)", {"x"});
  try {
    e.evaluate(std::map<std::string, double>{{"x", -1.0}});
    FAIL();
  } catch (const DomainError& err) {
    EXPECT_EQ(err.subexpression(), "sqrt(x)");
  }
  EXPECT_THROW(Expression::parse("ln(x)", {"x"}).evaluate(std::map<std::string, double>{{"x", 0.0}}), DomainError);
  EXPECT_THROW(Expression::parse("1/x", {"x"}).evaluate(std::map<std::string, double>{{"x", 0.0}}), DomainError);
  EXPECT_THROW(Expression::parse("x^0.5", {"x"}).evaluate(std::map<std::string, double>{{"x", -2.0}}), DomainError);
  // Integer powers of negative bases are fine.
  EXPECT_DOUBLE_EQ(Expression::parse("x^3", {"x"}).evaluate(std::map<std::string, double>{{"x", -2.0}}), -8.0);
  EXPECT_THROW(Expression::parse("x + y", kXY).evaluate(std::map<std::string, double>{{"x", 1.0}}), std::invalid_argument);
}

TEST(DirectionalDerivative, Examples) {
  const auto [v1, d1] = directional_derivative(Expression::parse("x*y", kXY), {{"x", 1}, {"y", 2}}, {{"x", 1}, {"y", 0}});
  EXPECT_DOUBLE_EQ(v1, 2.0);
  EXPECT_DOUBLE_EQ(d1, 2.0);
  const auto [v2, d2] = directional_derivative(Expression::parse("x^2+y^2", kXY), {{"x", 3}, {"y", 4}}, {{"x", 0}, {"y", 1}});
  EXPECT_DOUBLE_EQ(v2, 25.0);
  EXPECT_DOUBLE_EQ(d2, 8.0);
  const Expression e = Expression::parse("sin(x)*exp(y) + atan2(y, x)", kXY);
  const auto [v3, d3] = directional_derivative(e, {{"x", 0.3}, {"y", -0.2}}, {});
  EXPECT_DOUBLE_EQ(v3, e.evaluate(std::map<std::string, double>{{"x", 0.3}, {"y", -0.2}}));
  EXPECT_EQ(d3, 0.0);
}

TEST(Hessian, MatchesHandDerivatives) {
  const Expression e = Expression::parse("x^3*y + sin(y)", kXY);
  Vector p(2);
  p << 1.5, 0.7;
  const Matrix h = hessian(e, p);
  EXPECT_NEAR(h(0, 0), 6 * 1.5 * 0.7, 1e-12);
  EXPECT_NEAR(h(0, 1), 3 * 1.5 * 1.5, 1e-12);
  EXPECT_NEAR(h(1, 0), 3 * 1.5 * 1.5, 1e-12);
  EXPECT_NEAR(h(1, 1), -std::sin(0.7), 1e-12);
}

// Random expression generator for property checks.
class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : gen_(seed) {}

  std::string make(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    switch (pick(gen_)) {
      case 0: return var();
      case 1: return number();
      case 2: return "(" + make(depth - 1) + " + " + make(depth - 1) + ")";
      case 3: return "(" + make(depth - 1) + " - " + make(depth - 1) + ")";
      case 4: return make(depth - 1) + "*" + make(depth - 1);
      case 5: return "sin(" + make(depth - 1) + ")";
      case 6: return "cos(" + make(depth - 1) + ")";
      case 7: return "(" + make(depth - 1) + ")^" + std::to_string(1 + (gen_() % 3));
      case 8: return "exp(" + make(depth - 1) + "/4)";
      default: return "-" + var();
    }
  }

 private:
  std::string var() { return kXYZ[gen_() % 3]; }
  std::string number() {
    std::uniform_real_distribution<double> d(0.1, 3.0);
    return std::to_string(d(gen_));
  }
  std::mt19937_64 gen_;
};

TEST(Property, DualMatchesCentralDifferences) {
  ExprGen g(7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Expression e = Expression::parse(g.make(4), kXYZ);
    Vector x(3), dir(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = coord(rng);
      dir[i] = coord(rng);
    }
    const auto [value, der] = directional_derivative(e, x, dir);
    // Independent oracle: central differences on plain double evaluation.
    double fd = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd += dir[i] * (e.evaluate(xp) - e.evaluate(xm)) / (2 * h);
    }
    EXPECT_DOUBLE_EQ(value, e.evaluate(x));
    const double scale = std::max(1.0, std::abs(der));
    EXPECT_LE(std::abs(der - fd) / scale, 1e-6) << e.to_string();
    ++checked;
  }
  EXPECT_EQ(checked, 300);
}

TEST(Property, DirectionalDerivativeIsLinear) {
  ExprGen g(3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Expression e = Expression::parse(g.make(3), kXYZ);
    Vector x(3), u(3), v(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = coord(rng);
      u[i] = coord(rng);
      v[i] = coord(rng);
    }
    const double du = directional_derivative(e, x, u).second;
    const double dv = directional_derivative(e, x, v).second;
    const double duv = directional_derivative(e, x, u + v).second;
    EXPECT_NEAR(duv, du + dv, 1e-12 * std::max(1.0, std::abs(duv))) << e.to_string();
    // The gradient route is the same linear functional.
    EXPECT_NEAR(gradient(e, x).dot(u), du, 1e-12 * std::max(1.0, std::abs(du)));
  }
}

TEST(Property, PrintParseRoundTrip) {
  ExprGen g(19);
  for (int trial = 0; trial < 300; ++trial) {
    const Expression e = Expression::parse(g.make(5), kXYZ);
    const std::string printed = e.to_string();
    const Expression again = Expression::parse(printed, kXYZ);
    EXPECT_TRUE(e.structurally_equal(again)) << printed;
    EXPECT_EQ(again.to_string(), printed);
  }
  for (const char* text : {"-x^2", "(-x)^2", "x^y^z", "(x^y)^z", "x - (y - z)", "x/(y*z)", "--x", "x*-y", "2^-x",
                           "atan2(x, y - 1)", "-(x + y)"}) {
    const Expression e = Expression::parse(text, kXYZ);
    EXPECT_TRUE(e.structurally_equal(Expression::parse(e.to_string(), kXYZ))) << text << " -> " << e.to_string();
  }
}

TEST(Expression, SubstituteAndRebind) {
  const Expression f = Expression::parse("x*y + 1", kXY);
  const std::vector<std::string> t{"t"};
  const std::vector<Expression> repl{Expression::parse("cos(t)", t), Expression::parse("sin(t)", t)};
  const Expression g = f.substitute(repl, t);
  EXPECT_NEAR(g.evaluate(std::map<std::string, double>{{"t", 0.3}}), std::cos(0.3) * std::sin(0.3) + 1, 1e-15);
  const Expression r = f.rebind({"y", "w", "x"});
  EXPECT_DOUBLE_EQ(r.evaluate(std::map<std::string, double>{{"x", 2}, {"y", 5}, {"w", 0}}), 11.0);
  EXPECT_TRUE(Expression::parse("3", kXY).is_constant());
  EXPECT_FALSE(f.depends_on(2));
  EXPECT_TRUE(f.depends_on(1));
}

}  // namespace
}  // namespace slicekit
