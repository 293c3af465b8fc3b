#include "slicekit/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

namespace slicekit {

namespace {

struct FunctionInfo {
  std::string_view name;
  Function fn;
  std::size_t arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Function::sin, 1},   {"cos", Function::cos, 1},   {"tan", Function::tan, 1},
    {"exp", Function::exp, 1},   {"ln", Function::ln, 1},     {"sqrt", Function::sqrt, 1},
    {"abs", Function::abs, 1},   {"atan2", Function::atan2, 2},
};

NodePtr make_node(NodeKind kind, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

NodePtr make_constant_node(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::constant;
  n->value = v;
  return n;
}

NodePtr make_variable_node(std::size_t i) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::variable;
  n->index = i;
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables) : text_(text), vars_(variables) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    NodePtr root = parse_expr();
    skip_space();
    if (pos_ < text_.size()) fail_unexpected();
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail_unexpected() {
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(NodeKind::add, {lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make_node(NodeKind::sub, {lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(NodeKind::mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make_node(NodeKind::div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_node(NodeKind::neg, {parse_unary()});
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_node(NodeKind::pow, {base, parse_unary()});
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail_unexpected();
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (accept('(')) {
      NodePtr inner = parse_expr();
      if (!accept(')')) fail_unexpected();
      return inner;
    }
    fail_unexpected();
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) ++end;
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
      if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
        end = e;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + end, value);
    if (ec != std::errc() || ptr != text_.data() + end) throw ParseError("malformed number", start);
    pos_ = end;
    return make_constant_node(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    const auto var = std::find(vars_.begin(), vars_.end(), name);
    if (var != vars_.end()) return make_variable_node(static_cast<std::size_t>(var - vars_.begin()));

    const auto* info = std::find_if(std::begin(kFunctions), std::end(kFunctions),
                                    [&](const FunctionInfo& f) { return f.name == name; });
    if (info == std::end(kFunctions)) throw UnknownIdentifier(name, start);
    if (!accept('(')) throw ParseError("expected '(' after function '" + name + "'", pos_);
    auto call = std::make_shared<Node>();
    call->kind = NodeKind::call;
    call->fn = info->fn;
    call->args.push_back(parse_expr());
    while (accept(',')) call->args.push_back(parse_expr());
    if (!accept(')')) fail_unexpected();
    if (call->args.size() != info->arity) {
      throw ParseError("function '" + name + "' takes " + std::to_string(info->arity) + " argument(s)", start);
    }
    return call;
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::neg: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // Negative literals only arise programmatically; keep them atomic.
  if (v < 0 || std::signbit(v)) s = "(" + s + ")";
  return s;
}

void print(const Node& n, const std::vector<std::string>& vars, std::string& out) {
  auto wrap = [&](const Node& child, bool parens) {
    if (parens) out += '(';
    print(child, vars, out);
    if (parens) out += ')';
  };
  switch (n.kind) {
    case NodeKind::constant:
      out += format_number(n.value);
      return;
    case NodeKind::variable:
      out += n.index < vars.size() ? vars[n.index] : "$" + std::to_string(n.index);
      return;
    case NodeKind::neg:
      out += '-';
      wrap(*n.args[0], precedence(*n.args[0]) < 3);
      return;
    case NodeKind::pow:
      wrap(*n.args[0], precedence(*n.args[0]) < 5);
      out += '^';
      wrap(*n.args[1], precedence(*n.args[1]) < 3);
      return;
    case NodeKind::call:
      out += function_name(n.fn);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], vars, out);
      }
      out += ')';
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == NodeKind::add ? " + " : n.kind == NodeKind::sub ? " - " : n.kind == NodeKind::mul ? "*" : "/";
      wrap(*n.args[0], precedence(*n.args[0]) < p);
      out += op;
      wrap(*n.args[1], precedence(*n.args[1]) <= p);
      return;
    }
  }
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::constant:
      if (a.value != b.value) return false;
      break;
    case NodeKind::variable:
      if (a.index != b.index) return false;
      break;
    case NodeKind::call:
      if (a.fn != b.fn) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal_nodes(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

NodePtr map_variables(const NodePtr& n, const std::function<NodePtr(std::size_t)>& f) {
  if (n->kind == NodeKind::variable) return f(n->index);
  if (n->args.empty()) return n;
  auto copy = std::make_shared<Node>(*n);
  for (auto& a : copy->args) a = map_variables(a, f);
  return copy;
}

bool any_variable(const Node& n, const std::function<bool(std::size_t)>& pred) {
  if (n.kind == NodeKind::variable) return pred(n.index);
  return std::any_of(n.args.begin(), n.args.end(), [&](const NodePtr& a) { return any_variable(*a, pred); });
}

}  // namespace

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

std::string node_to_string(const Node& node, const std::vector<std::string>& variables) {
  std::string out;
  print(node, variables, out);
  return out;
}

namespace detail {
void throw_domain(const Node& node, const std::vector<std::string>& variables, const char* what) {
  throw DomainError(what, node_to_string(node, variables));
}
}  // namespace detail

Expression::Expression() : root_(make_constant_node(0.0)) {}

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  Parser parser(text, variables);
  NodePtr root = parser.parse();
  return Expression(std::move(root), std::move(variables));
}

Expression Expression::constant(double value, std::vector<std::string> variables) {
  // Literals are non-negative in parsed trees; mirror that so printing round-trips.
  if (value < 0.0) return Expression(make_node(NodeKind::neg, {make_constant_node(-value)}), std::move(variables));
  return Expression(make_constant_node(value), std::move(variables));
}

Expression Expression::variable(std::size_t index, std::vector<std::string> variables) {
  if (index >= variables.size()) throw std::out_of_range("variable index out of range");
  return Expression(make_variable_node(index), std::move(variables));
}

double Expression::evaluate(const std::map<std::string, double>& bindings) const {
  std::vector<double> x(variables_.size(), 0.0);
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto it = bindings.find(variables_[i]);
    if (it == bindings.end()) {
      if (depends_on(i)) throw std::invalid_argument("variable '" + variables_[i] + "' is not bound");
      continue;
    }
    x[i] = it->second;
  }
  return evaluate(std::span<const double>(x));
}

std::string Expression::to_string() const { return node_to_string(*root_, variables_); }

bool Expression::structurally_equal(const Expression& other) const {
  return variables_ == other.variables_ && equal_nodes(*root_, *other.root_);
}

bool Expression::depends_on(std::size_t index) const {
  return any_variable(*root_, [index](std::size_t i) { return i == index; });
}

bool Expression::is_constant() const {
  return !any_variable(*root_, [](std::size_t) { return true; });
}

Expression Expression::substitute(std::span<const Expression> replacements, std::vector<std::string> variables) const {
  if (replacements.size() < variables_.size()) throw std::invalid_argument("substitute: too few replacements");
  for (const auto& r : replacements) {
    if (r.variables() != variables) throw std::invalid_argument("substitute: replacement variable lists differ");
  }
  NodePtr root = map_variables(root_, [&](std::size_t i) { return replacements[i].root_; });
  return Expression(std::move(root), std::move(variables));
}

Expression Expression::rebind(const std::vector<std::string>& variables) const {
  NodePtr root = map_variables(root_, [&](std::size_t i) {
    const auto it = std::find(variables.begin(), variables.end(), variables_[i]);
    if (it == variables.end()) throw UnknownIdentifier(variables_[i], 0);
    return make_variable_node(static_cast<std::size_t>(it - variables.begin()));
  });
  return Expression(std::move(root), variables);
}

std::pair<double, double> directional_derivative(const Expression& e, const Vector& x, const Vector& direction) {
  std::vector<Dual<double>> seeded(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) seeded[static_cast<std::size_t>(i)] = {x[i], direction[i]};
  const Dual<double> r = e.eval<Dual<double>>(seeded);
  return {r.val, r.der};
}

std::pair<double, double> directional_derivative(const Expression& e, const std::map<std::string, double>& bindings,
                                                 const std::map<std::string, double>& direction) {
  const auto& vars = e.variables();
  Vector x = Vector::Zero(static_cast<Eigen::Index>(vars.size()));
  Vector d = Vector::Zero(x.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto it = bindings.find(vars[i]);
    if (it != bindings.end()) {
      x[static_cast<Eigen::Index>(i)] = it->second;
    } else if (e.depends_on(i)) {
      throw std::invalid_argument("variable '" + vars[i] + "' is not bound");
    }
    const auto dt = direction.find(vars[i]);
    if (dt != direction.end()) d[static_cast<Eigen::Index>(i)] = dt->second;
  }
  return directional_derivative(e, x, d);
}

Vector gradient(const Expression& e, const Vector& x) {
  const auto n = x.size();
  Vector g(n);
  std::vector<Dual<double>> seeded(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) seeded[static_cast<std::size_t>(i)] = Dual<double>(x[i]);
  for (Eigen::Index i = 0; i < n; ++i) {
    seeded[static_cast<std::size_t>(i)].der = 1.0;
    g[i] = e.eval<Dual<double>>(seeded).der;
    seeded[static_cast<std::size_t>(i)].der = 0.0;
  }
  return g;
}

Matrix hessian(const Expression& e, const Vector& x) {
  using D2 = Dual<Dual<double>>;
  const auto n = x.size();
  Matrix h(n, n);
  std::vector<D2> seeded(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) seeded[static_cast<std::size_t>(i)] = D2(Dual<double>(x[i]));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      seeded[static_cast<std::size_t>(i)].val.der = 1.0;
      seeded[static_cast<std::size_t>(j)].der.val = 1.0;
      h(i, j) = h(j, i) = e.eval<D2>(seeded).der.der;
      seeded[static_cast<std::size_t>(i)].val.der = 0.0;
      seeded[static_cast<std::size_t>(j)].der.val = 0.0;
    }
  }
  return h;
}

}  // namespace slicekit
