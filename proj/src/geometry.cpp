#include "slicekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace slicekit {

CoordinateSpace::CoordinateSpace(std::string name, std::vector<std::string> coordinates)
    : name_(std::move(name)), coords_(std::move(coordinates)) {
  if (coords_.empty()) throw std::invalid_argument("space '" + name_ + "' needs at least one coordinate");
  std::set<std::string> seen(coords_.begin(), coords_.end());
  if (seen.size() != coords_.size()) throw std::invalid_argument("space '" + name_ + "' has duplicate coordinates");
  periods_.resize(coords_.size());
  bounds_.assign(coords_.size(), Interval{});
}

std::optional<std::size_t> CoordinateSpace::index_of(const std::string& coordinate) const {
  const auto it = std::find(coords_.begin(), coords_.end(), coordinate);
  if (it == coords_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - coords_.begin());
}

void CoordinateSpace::set_period(std::size_t i, double period) {
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  periods_.at(i) = period;
}

bool CoordinateSpace::has_periodic() const {
  return std::any_of(periods_.begin(), periods_.end(), [](const auto& p) { return p.has_value(); });
}

void CoordinateSpace::add_constraint(const std::string& inequality) {
  const auto gt = inequality.find('>');
  const auto lt = inequality.find('<');
  if ((gt == std::string::npos) == (lt == std::string::npos)) {
    throw ParseError("domain constraint needs exactly one '>' or '<'", 0);
  }
  const auto pos = gt != std::string::npos ? gt : lt;
  const Expression lhs = Expression::parse(inequality.substr(0, pos), coords_);
  const Expression rhs = Expression::parse(inequality.substr(pos + 1), coords_);
  auto diff = std::make_shared<Node>();
  diff->kind = NodeKind::sub;
  diff->args = gt != std::string::npos ? std::vector<NodePtr>{lhs.root_ptr(), rhs.root_ptr()}
                                       : std::vector<NodePtr>{rhs.root_ptr(), lhs.root_ptr()};
  // Re-parse the printed difference so the constraint owns a plain parsed tree.
  const std::string text = node_to_string(*diff, coords_);
  constraints_.push_back({Expression::parse(text, coords_), inequality});
}

void CoordinateSpace::set_bounds(std::vector<Interval> bounds) {
  if (bounds.size() != coords_.size()) throw std::invalid_argument("bounds count must match dimension");
  for (const auto& b : bounds) {
    if (!(b.lo <= b.hi)) throw std::invalid_argument("bounds must satisfy lo <= hi");
  }
  bounds_ = std::move(bounds);
}

bool CoordinateSpace::contains(const Vector& x) const {
  if (x.size() != dimension()) return false;
  if (!x.allFinite()) return false;
  for (const auto& c : constraints_) {
    try {
      if (!(c.positive.evaluate(x) > kDomainMargin)) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

Vector CoordinateSpace::canonicalize(Vector x) const {
  for (std::size_t i = 0; i < periods_.size(); ++i) {
    if (!periods_[i]) continue;
    const double p = *periods_[i];
    double v = std::fmod(x[static_cast<Eigen::Index>(i)], p);
    if (v < 0.0) v += p;
    if (v >= p) v = 0.0;
    x[static_cast<Eigen::Index>(i)] = v;
  }
  return x;
}

Vector CoordinateSpace::difference(const Vector& a, const Vector& b) const {
  Vector d = a - b;
  for (std::size_t i = 0; i < periods_.size(); ++i) {
    if (!periods_[i]) continue;
    const double p = *periods_[i];
    const auto k = static_cast<Eigen::Index>(i);
    d[k] -= p * std::floor(d[k] / p + 0.5);
  }
  return d;
}

SpaceRef product_space(std::string name, const CoordinateSpace& m, const CoordinateSpace& n) {
  std::vector<std::string> coords = m.coordinates();
  coords.insert(coords.end(), n.coordinates().begin(), n.coordinates().end());
  auto space = std::make_shared<CoordinateSpace>(std::move(name), coords);
  std::vector<Interval> bounds = m.bounds();
  bounds.insert(bounds.end(), n.bounds().begin(), n.bounds().end());
  space->set_bounds(bounds);
  const auto md = static_cast<std::size_t>(m.dimension());
  for (std::size_t i = 0; i < md; ++i) {
    if (m.period(i)) space->set_period(i, *m.period(i));
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(n.dimension()); ++i) {
    if (n.period(i)) space->set_period(md + i, *n.period(i));
  }
  for (const auto& c : m.constraints()) space->add_constraint(c.text);
  for (const auto& c : n.constraints()) space->add_constraint(c.text);
  return space;
}

Point Point::make(SpaceRef space, Vector coords) {
  require_in_domain(*space, coords);
  coords = space->canonicalize(std::move(coords));
  return Point{std::move(space), std::move(coords)};
}

void require_in_domain(const CoordinateSpace& space, const Vector& x) {
  if (x.size() != space.dimension()) {
    throw std::invalid_argument("point has " + std::to_string(x.size()) + " coordinates, space '" + space.name() +
                                "' has " + std::to_string(space.dimension()));
  }
  if (!space.contains(x)) throw OutOfDomain("point outside the domain of space '" + space.name() + "'");
}

namespace {

std::vector<Expression> parse_all(const std::vector<std::string>& texts, const std::vector<std::string>& vars) {
  std::vector<Expression> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Expression::parse(t, vars));
  return out;
}

Vector eval_components(const std::vector<Expression>& components, const Vector& x) {
  Vector out(static_cast<Eigen::Index>(components.size()));
  for (std::size_t k = 0; k < components.size(); ++k) out[static_cast<Eigen::Index>(k)] = components[k].evaluate(x);
  return out;
}

void check_components(const std::string& what, const std::vector<Expression>& components, Eigen::Index expected,
                      const CoordinateSpace& vars) {
  if (static_cast<Eigen::Index>(components.size()) != expected) {
    throw std::invalid_argument(what + " has " + std::to_string(components.size()) + " components, expected " +
                                std::to_string(expected));
  }
  for (const auto& c : components) {
    if (c.variables() != vars.coordinates()) {
      throw std::invalid_argument(what + ": component variables do not match space '" + vars.name() + "'");
    }
  }
}

}  // namespace

SmoothMap::SmoothMap(std::string name, SpaceRef source, SpaceRef target, std::vector<Expression> components)
    : name_(std::move(name)), source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
  check_components("map '" + name_ + "'", components_, target_->dimension(), *source_);
}

SmoothMap::SmoothMap(std::string name, SpaceRef source, SpaceRef target, NumericFunction function)
    : name_(std::move(name)), source_(std::move(source)), target_(std::move(target)), function_(std::move(function)) {}

SmoothMap SmoothMap::parse(std::string name, SpaceRef source, SpaceRef target, const std::vector<std::string>& texts) {
  auto comps = parse_all(texts, source->coordinates());
  return SmoothMap(std::move(name), std::move(source), std::move(target), std::move(comps));
}

SmoothMap SmoothMap::identity(const SpaceRef& space) {
  std::vector<Expression> comps;
  for (std::size_t i = 0; i < space->coordinates().size(); ++i) comps.push_back(Expression::variable(i, space->coordinates()));
  return SmoothMap("id_" + space->name(), space, space, std::move(comps));
}

Vector SmoothMap::operator()(const Vector& x) const {
  if (function_) return function_(x);
  return eval_components(components_, x);
}

SmoothMap SmoothMap::fix_trailing(const SpaceRef& source, const Vector& values) const {
  const auto m = source->dimension();
  if (m + values.size() != source_->dimension()) throw std::invalid_argument("fix_trailing: dimension mismatch");
  if (function_) {
    auto f = function_;
    const Vector fixed = values;
    return SmoothMap(name_, source, target_, [f, fixed, m](const Vector& x) {
      Vector full(m + fixed.size());
      full << x, fixed;
      return f(full);
    });
  }
  std::vector<Expression> repl;
  for (Eigen::Index i = 0; i < source_->dimension(); ++i) {
    repl.push_back(i < m ? Expression::variable(static_cast<std::size_t>(i), source->coordinates())
                         : Expression::constant(values[i - m], source->coordinates()));
  }
  std::vector<Expression> comps;
  for (const auto& c : components_) comps.push_back(c.substitute(repl, source->coordinates()));
  return SmoothMap(name_, source, target_, std::move(comps));
}

VectorField::VectorField(std::string name, SpaceRef space, std::vector<Expression> components)
    : name_(std::move(name)), space_(std::move(space)), components_(std::move(components)) {
  check_components("field '" + name_ + "'", components_, space_->dimension(), *space_);
}

VectorField::VectorField(std::string name, SpaceRef space, NumericFunction function)
    : name_(std::move(name)), space_(std::move(space)), function_(std::move(function)) {}

VectorField VectorField::parse(std::string name, SpaceRef space, const std::vector<std::string>& texts) {
  auto comps = parse_all(texts, space->coordinates());
  return VectorField(std::move(name), std::move(space), std::move(comps));
}

VectorField VectorField::zero(const SpaceRef& space) {
  std::vector<Expression> comps(space->coordinates().size(), Expression::constant(0.0, space->coordinates()));
  return VectorField("zero", space, std::move(comps));
}

Vector VectorField::operator()(const Vector& x) const {
  if (function_) return function_(x);
  return eval_components(components_, x);
}

BilinearFormField::BilinearFormField(std::string name, SpaceRef space, FormKind kind, std::vector<Expression> entries)
    : name_(std::move(name)), space_(std::move(space)), kind_(kind), n_(space_->dimension()), entries_(std::move(entries)) {
  check_components("form '" + name_ + "'", entries_, n_ * n_, *space_);
}

BilinearFormField BilinearFormField::parse(std::string name, SpaceRef space, FormKind kind,
                                           const std::vector<std::vector<std::string>>& rows) {
  const auto n = static_cast<std::size_t>(space->dimension());
  if (rows.size() != n) throw std::invalid_argument("form '" + name + "' needs " + std::to_string(n) + " rows");
  std::vector<Expression> entries;
  for (const auto& row : rows) {
    if (row.size() != n) throw std::invalid_argument("form '" + name + "' rows need " + std::to_string(n) + " entries");
    for (const auto& t : row) entries.push_back(Expression::parse(t, space->coordinates()));
  }
  return BilinearFormField(std::move(name), std::move(space), kind, std::move(entries));
}

BilinearFormField BilinearFormField::canonical(const SpaceRef& space, bool interleaved) {
  const auto dim = space->dimension();
  if (dim % 2 != 0) throw std::invalid_argument("canonical symplectic form needs an even-dimensional space");
  const auto n = dim / 2;
  const auto& vars = space->coordinates();
  std::vector<Expression> entries(static_cast<std::size_t>(dim * dim), Expression::constant(0.0, vars));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index q = interleaved ? 2 * i : i;
    const Eigen::Index p = interleaved ? 2 * i + 1 : n + i;
    entries[static_cast<std::size_t>(q * dim + p)] = Expression::constant(1.0, vars);
    entries[static_cast<std::size_t>(p * dim + q)] = Expression::constant(-1.0, vars);
  }
  return BilinearFormField(interleaved ? "canonical-interleaved" : "canonical", space, FormKind::symplectic,
                           std::move(entries));
}

bool BilinearFormField::constant_coefficients() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Expression& e) { return e.is_constant(); });
}

Matrix BilinearFormField::operator()(const Vector& x) const {
  Matrix m(n_, n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    for (Eigen::Index j = 0; j < n_; ++j) m(i, j) = entry(i, j).evaluate(x);
  }
  return m;
}

double BilinearFormField::skew_defect(const Vector& x) const {
  const Matrix m = (*this)(x);
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

Matrix finite_difference_jacobian(const NumericFunction& f, const Vector& x, Eigen::Index rows) {
  Matrix j(rows, x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const Vector fp = f(xp);
    xp[i] = x[i] - h;
    const Vector fm = f(xp);
    xp[i] = x[i];
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

Matrix jacobian(const SmoothMap& f, const Vector& x, DiffMode mode) {
  const auto rows = f.target()->dimension();
  if (mode == DiffMode::automatic) mode = f.has_expressions() ? DiffMode::dual : DiffMode::finite_difference;
  if (mode == DiffMode::finite_difference) {
    return finite_difference_jacobian([&f](const Vector& p) { return f(p); }, x, rows);
  }
  if (!f.has_expressions()) {
    throw std::invalid_argument("map '" + f.name() + "' is numeric; only finite-difference Jacobians are available");
  }
  const auto n = x.size();
  Matrix j(rows, n);
  std::vector<Dual<double>> seeded(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) seeded[static_cast<std::size_t>(i)] = Dual<double>(x[i]);
  for (Eigen::Index i = 0; i < n; ++i) {
    seeded[static_cast<std::size_t>(i)].der = 1.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      j(k, i) = f.components()[static_cast<std::size_t>(k)].eval<Dual<double>>(seeded).der;
    }
    seeded[static_cast<std::size_t>(i)].der = 0.0;
  }
  return j;
}

Vector pushforward(const SmoothMap& f, const Vector& x, const Vector& v, DiffMode mode) {
  return jacobian(f, x, mode) * v;
}

Matrix pullback_two_form(const SmoothMap& alpha, const BilinearFormField& omega, const Vector& x, DiffMode mode) {
  const Matrix j = jacobian(alpha, x, mode);
  const Matrix w = omega(alpha(x));
  const Matrix pb = j.transpose() * w * j;
  // Antisymmetrize away rounding so the result is exactly skew.
  return 0.5 * (pb - pb.transpose());
}

PullbackValue pullback_function(const SmoothMap& alpha, const Expression& h, const Vector& x, DiffMode mode) {
  const Vector z = alpha(x);
  const Matrix j = jacobian(alpha, x, mode);
  return {h.evaluate(z), j.transpose() * gradient(h, z)};
}

SmoothMap compose(const SmoothMap& g, const SmoothMap& f, std::string name) {
  if (name.empty()) name = g.name() + "_o_" + f.name();
  if (f.target()->dimension() != g.source()->dimension()) throw std::invalid_argument("compose: dimension mismatch");
  if (g.has_expressions() && f.has_expressions()) {
    std::vector<Expression> comps;
    for (const auto& c : g.components()) comps.push_back(c.substitute(f.components(), f.source()->coordinates()));
    return SmoothMap(std::move(name), f.source(), g.target(), std::move(comps));
  }
  return SmoothMap(std::move(name), f.source(), g.target(), [g, f](const Vector& x) { return g(f(x)); });
}

}  // namespace slicekit
