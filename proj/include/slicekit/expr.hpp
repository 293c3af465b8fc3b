#pragma once

// Expression strings: parsing, printing and (dual-number) evaluation.
//
// Grammar, loosest binding first:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
// Functions: sin cos tan exp ln sqrt abs atan2.

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slicekit/dual.hpp"

namespace slicekit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public ParseError {
 public:
  UnknownIdentifier(std::string name, std::size_t offset)
      : ParseError("unknown identifier '" + name + "'", offset), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Raised when a partial function is evaluated outside its domain.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : std::domain_error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class NodeKind { constant, variable, add, sub, mul, div, pow, neg, call };
enum class Function { sin, cos, tan, exp, ln, sqrt, abs, atan2 };

struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;           // constant
  std::size_t index = 0;        // variable
  Function fn = Function::sin;  // call
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

std::string_view function_name(Function fn);

/// Immutable expression over an ordered list of named variables.
class Expression {
 public:
  Expression();  // the constant 0 over no variables

  static Expression parse(std::string_view text, std::vector<std::string> variables);
  static Expression constant(double value, std::vector<std::string> variables = {});
  static Expression variable(std::size_t index, std::vector<std::string> variables);

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const Node& root() const noexcept { return *root_; }
  const NodePtr& root_ptr() const noexcept { return root_; }

  template <typename T>
  T eval(std::span<const T> x) const;

  double evaluate(std::span<const double> x) const { return eval<double>(x); }
  double evaluate(const Vector& x) const { return evaluate(std::span<const double>(x.data(), x.size())); }
  double evaluate(const std::map<std::string, double>& bindings) const;

  /// Minimal-parenthesis rendering that parses back to the same tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;
  bool depends_on(std::size_t index) const;
  bool is_constant() const;

  /// Replaces variable i by replacements[i]; the result lives over
  /// `variables` (the replacements' common variable list).
  Expression substitute(std::span<const Expression> replacements, std::vector<std::string> variables) const;

  /// Same tree re-indexed over a different variable list (by name).
  Expression rebind(const std::vector<std::string>& variables) const;

 private:
  Expression(NodePtr root, std::vector<std::string> variables)
      : root_(std::move(root)), variables_(std::move(variables)) {}

  NodePtr root_;
  std::vector<std::string> variables_;
};

std::string node_to_string(const Node& node, const std::vector<std::string>& variables);

namespace detail {

template <typename T>
T make_constant(double v) {
  if constexpr (std::is_same_v<T, double>) {
    return v;
  } else {
    return T(make_constant<decltype(T{}.val)>(v));
  }
}

template <typename T>
T integer_power(T base, long n) {
  T result = make_constant<T>(1.0);
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

[[noreturn]] void throw_domain(const Node& node, const std::vector<std::string>& variables, const char* what);

template <typename T>
T eval_node(const Node& node, std::span<const T> x, const std::vector<std::string>& vars) {
  using std::sin, std::cos, std::tan, std::exp, std::log, std::sqrt, std::abs, std::atan2, std::pow;
  switch (node.kind) {
    case NodeKind::constant:
      return make_constant<T>(node.value);
    case NodeKind::variable:
      return x[node.index];
    case NodeKind::add:
      return eval_node(*node.args[0], x, vars) + eval_node(*node.args[1], x, vars);
    case NodeKind::sub:
      return eval_node(*node.args[0], x, vars) - eval_node(*node.args[1], x, vars);
    case NodeKind::mul:
      return eval_node(*node.args[0], x, vars) * eval_node(*node.args[1], x, vars);
    case NodeKind::div: {
      const T den = eval_node(*node.args[1], x, vars);
      if (primal(den) == 0.0) throw_domain(node, vars, "division by zero");
      return eval_node(*node.args[0], x, vars) / den;
    }
    case NodeKind::neg:
      return -eval_node(*node.args[0], x, vars);
    case NodeKind::pow: {
      const Node& ex = *node.args[1];
      const T base = eval_node(*node.args[0], x, vars);
      if (ex.kind == NodeKind::constant) {
        const double c = ex.value;
        if (c == std::floor(c) && std::abs(c) <= 1024.0) {
          const long n = static_cast<long>(c);
          if (n >= 0) return integer_power(base, n);
          if (primal(base) == 0.0) throw_domain(node, vars, "zero to a negative power");
          return make_constant<T>(1.0) / integer_power(base, -n);
        }
        if (primal(base) < 0.0) throw_domain(node, vars, "negative base to a fractional power");
        if (primal(base) == 0.0 && c < 1.0) throw_domain(node, vars, "non-differentiable power at zero");
        return pow(base, c);
      }
      if (primal(base) <= 0.0) throw_domain(node, vars, "non-positive base to a variable power");
      return exp(eval_node(ex, x, vars) * log(base));
    }
    case NodeKind::call: {
      const T a = eval_node(*node.args[0], x, vars);
      switch (node.fn) {
        case Function::sin: return sin(a);
        case Function::cos: return cos(a);
        case Function::tan: return tan(a);
        case Function::exp: return exp(a);
        case Function::ln:
          if (primal(a) <= 0.0) throw_domain(node, vars, "logarithm of a non-positive number");
          return log(a);
        case Function::sqrt:
          if (primal(a) < 0.0) throw_domain(node, vars, "square root of a negative number");
          if (primal(a) == 0.0 && is_dual_v<T>) throw_domain(node, vars, "square root is not differentiable at zero");
          return sqrt(a);
        case Function::abs: return abs(a);
        case Function::atan2: {
          const T b = eval_node(*node.args[1], x, vars);
          if (primal(a) == 0.0 && primal(b) == 0.0) throw_domain(node, vars, "atan2 at the origin");
          return atan2(a, b);
        }
      }
    }
  }
  throw std::logic_error("unreachable expression node");
}

}  // namespace detail

template <typename T>
T Expression::eval(std::span<const T> x) const {
  if (x.size() < variables_.size()) {
    throw std::invalid_argument("expression '" + to_string() + "' expects " + std::to_string(variables_.size()) +
                                " values, got " + std::to_string(x.size()));
  }
  return detail::eval_node<T>(*root_, x, variables_);
}

/// Value and exact derivative of e at x along `direction`.
std::pair<double, double> directional_derivative(const Expression& e, const Vector& x, const Vector& direction);
std::pair<double, double> directional_derivative(const Expression& e, const std::map<std::string, double>& bindings,
                                                 const std::map<std::string, double>& direction);

Vector gradient(const Expression& e, const Vector& x);
Matrix hessian(const Expression& e, const Vector& x);

/// Partial derivative d e / d x_i evaluated at a point of any scalar type.
template <typename T>
T partial(const Expression& e, std::span<const T> x, std::size_t i) {
  std::vector<Dual<T>> seeded(x.begin(), x.end());
  seeded[i].der = detail::make_constant<T>(1.0);
  return e.eval<Dual<T>>(seeded).der;
}

}  // namespace slicekit
