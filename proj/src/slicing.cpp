#include "slicekit/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "slicekit/linalg.hpp"
#include "slicekit/parallel.hpp"

namespace slicekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSectionTolerance = 1e-10;
constexpr double kCoverTolerance = 1e-8;

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

Vector least_squares_field(const Matrix& j, const Vector& target, const std::string& map_name) {
  const LeastSquares ls = least_squares(j, target);
  if (!ls.full_column_rank) {
    throw NotImmersive("'" + map_name + "' is not an immersion here (rank " + std::to_string(ls.rank) + " < " +
                       std::to_string(j.cols()) + "); X cannot be derived");
  }
  return ls.solution;
}

// First m columns of the family Jacobian, by duals when possible.
Matrix base_block(const CompleteSlicing& cs, const Vector& w) {
  const Eigen::Index m = cs.base_dim();
  if (cs.family.has_expressions()) return jacobian(cs.family, w).leftCols(m);
  const Eigen::Index rows = cs.target()->dimension();
  Matrix j(rows, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(w[i]));
    Vector up = w;
    Vector down = w;
    up[i] += h;
    down[i] -= h;
    j.col(i) = (cs.family(up) - cs.family(down)) / (2.0 * h);
  }
  return j;
}

double family_gap(const CompleteSlicing& cs, const Vector& w, const Vector& z) {
  return cs.target()->difference(cs.family(w), z).norm();
}

}  // namespace

Vector slicing_field_at(const Slicing& s, const VectorField& z, const Vector& x) {
  if (s.field) return (*s.field)(x);
  return least_squares_field(jacobian(s.map, x), z(s.map(x)), s.map.name());
}

Vector slicing_residual(const Slicing& s, const VectorField& z, const Vector& x) {
  if (s.map.target()->dimension() != z.space()->dimension()) {
    throw std::invalid_argument("slicing '" + s.map.name() + "' does not map into the space of '" + z.name() + "'");
  }
  require_in_domain(*s.base(), x);
  const Matrix j = jacobian(s.map, x);
  const Vector target = z(s.map(x));
  const Vector field = s.field ? (*s.field)(x) : least_squares_field(j, target, s.map.name());
  return j * field - target;
}

CheckReport check_slicing(const Slicing& s, const VectorField& z, const SamplePlan& plan, double tolerance) {
  return check_slicing(s, z, generate_samples(plan, *s.base()), tolerance);
}

CheckReport check_slicing(const Slicing& s, const VectorField& z, const std::vector<Vector>& samples, double tolerance) {
  CheckReport report;
  report.check = "slicing";
  report.system = z.name() + " / " + s.map.name();
  report.tolerance = tolerance;
  report.citation = "T alpha o X = Z o alpha";
  if (!s.field) report.notes.push_back("X derived by least squares");
  record_each(report, samples, [&](std::size_t, const Vector& x) { return slicing_residual(s, z, x).norm(); });
  report.finalize();
  return report;
}

FibredStructure::FibredStructure(SmoothMap projection, std::optional<Eigen::Index> adapted_base_dim)
    : projection_(std::move(projection)), adapted_(adapted_base_dim) {
  const auto m = base()->dimension();
  if (m > total()->dimension()) throw std::invalid_argument("projection '" + projection_.name() + "' raises dimension");
  if (adapted_) {
    if (*adapted_ != m) throw std::invalid_argument("adapted split does not match the base dimension");
    if (!projection_.has_expressions()) throw std::invalid_argument("adapted projection must be given by expressions");
    for (Eigen::Index i = 0; i < m; ++i) {
      const Node& n = projection_.components()[static_cast<std::size_t>(i)].root();
      if (n.kind != NodeKind::variable || n.index != static_cast<std::size_t>(i)) {
        throw std::invalid_argument("adapted projection component " + std::to_string(i) + " is not coordinate " +
                                    total()->coordinates()[static_cast<std::size_t>(i)]);
      }
    }
  }
}

void FibredStructure::require_section(const SmoothMap& section, const Vector& x) const {
  if (section.target()->dimension() != total()->dimension() || section.source()->dimension() != base()->dimension()) {
    throw std::invalid_argument("'" + section.name() + "' does not map the base into the total space");
  }
  const double gap = base()->difference(projection_(section(x)), x).norm();
  if (!(gap <= kSectionTolerance)) {
    throw SectionViolation("'" + section.name() + "' is not a section: |pi(alpha(x)) - x| = " + format_real(gap));
  }
}

Vector induced_slicing_field(const FibredStructure& fib, const SmoothMap& section, const VectorField& z, const Vector& x) {
  fib.require_section(section, x);
  const Vector p = section(x);
  return jacobian(fib.projection(), p) * z(p);
}

CheckReport check_fibred_slicing(const FibredStructure& fib, const SmoothMap& section, const VectorField& z,
                                 const SamplePlan& plan, double tolerance) {
  const auto samples = generate_samples(plan, *section.source());
  for (const auto& x : samples) fib.require_section(section, x);

  CheckReport report;
  report.check = "fibred-slicing";
  report.system = z.name() + " / " + section.name();
  report.tolerance = tolerance;
  report.citation = "T alpha o T pi o Z agrees with Z on alpha(M)";
  std::vector<double> vertical(samples.size(), 0.0);
  record_each(report, samples, [&](std::size_t i, const Vector& x) {
    const Vector p = section(x);
    const Matrix jpi = jacobian(fib.projection(), p);
    const Vector zp = z(p);
    const Vector r = jacobian(section, x) * (jpi * zp) - zp;
    vertical[i] = (jpi * r).norm();
    return r.norm();
  });
  const double vmax = *std::max_element(vertical.begin(), vertical.end());
  report.metrics["vertical_defect_max"] = vmax;
  if (!(vmax <= 1e-10)) report.notes.push_back("residual is not pi-vertical: max |T pi r| = " + format_real(vmax));
  report.finalize();
  return report;
}

CompleteSlicing::CompleteSlicing(SpaceRef base, SpaceRef params, SmoothMap fam, std::optional<SmoothMap> inv,
                                 std::optional<SmoothMap> flds)
    : parameters(std::move(params)), family(std::move(fam)), inverse(std::move(inv)), fields(std::move(flds)),
      base_(std::move(base)) {
  if (family.source()->dimension() != base_->dimension() + parameters->dimension()) {
    throw std::invalid_argument("family '" + family.name() + "' is not defined on M x N");
  }
  if (inverse && (inverse->source()->dimension() != family.target()->dimension() ||
                  inverse->target()->dimension() != family.source()->dimension())) {
    throw std::invalid_argument("inverse '" + inverse->name() + "' has the wrong shape");
  }
  if (fields && (fields->source()->dimension() != family.source()->dimension() ||
                 fields->target()->dimension() != base_->dimension())) {
    throw std::invalid_argument("fields '" + fields->name() + "' have the wrong shape");
  }
}

Slicing CompleteSlicing::slice(const Vector& c) const {
  Slicing s{family.fix_trailing(base_, c), std::nullopt};
  if (fields) {
    const SmoothMap x = fields->fix_trailing(base_, c);
    if (x.has_expressions()) {
      s.field = VectorField(fields->name(), base_, x.components());
    } else {
      s.field = VectorField(fields->name(), base_, [x](const Vector& p) { return x(p); });
    }
  }
  return s;
}

FamilySeeds make_seeds(const CompleteSlicing& cs, const NewtonOptions& options) {
  const auto& space = *cs.product();
  const auto dim = static_cast<double>(space.dimension());
  std::size_t per_axis = std::max<std::size_t>(options.seed_per_axis, 1);
  while (per_axis > 1 && std::pow(static_cast<double>(per_axis), dim) > 4096.0) --per_axis;
  const auto count = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(per_axis), dim)));
  std::vector<Vector> grid;
  try {
    grid = generate_samples({SampleStrategy::grid, {}, count, 0}, space);
  } catch (const std::exception&) {
    return {};
  }
  std::vector<std::optional<Vector>> images(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      images[i] = cs.family(grid[i]);
    } catch (const std::exception&) {
    }
  });
  FamilySeeds seeds;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (images[i] && images[i]->allFinite()) {
      seeds.params.push_back(grid[i]);
      seeds.images.push_back(std::move(*images[i]));
    }
  }
  return seeds;
}

std::optional<Vector> invert_family(const CompleteSlicing& cs, const Vector& z, const FamilySeeds& seeds,
                                    const NewtonOptions& options) {
  if (seeds.params.empty()) return std::nullopt;
  const auto& target = *cs.target();
  const auto& product = *cs.product();
  std::size_t best = 0;
  double best_gap = kInf;
  for (std::size_t i = 0; i < seeds.images.size(); ++i) {
    const double g = target.difference(seeds.images[i], z).norm();
    if (g < best_gap) {
      best_gap = g;
      best = i;
    }
  }
  const double scale = std::max(1.0, z.norm());
  Vector w = seeds.params[best];
  Vector r = target.difference(cs.family(w), z);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    if (r.norm() <= options.tolerance * scale) break;
    const Vector step = least_squares(jacobian(cs.family, w), -r).solution;
    bool accepted = false;
    double lambda = 1.0;
    Vector w2;
    Vector r2;
    for (; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
      w2 = w + lambda * step;
      if (!product.contains(product.canonicalize(w2))) continue;
      try {
        r2 = target.difference(cs.family(w2), z);
      } catch (const std::exception&) {
        continue;
      }
      if (r2.norm() < r.norm()) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const bool small = (lambda * step).norm() <= options.tolerance * std::max(1.0, w.norm());
    w = std::move(w2);
    r = std::move(r2);
    if (small) break;
  }
  if (!(r.norm() <= kCoverTolerance * scale)) return std::nullopt;
  return product.canonicalize(std::move(w));
}

CheckReport check_complete_slicing(const CompleteSlicing& cs, const VectorField& z, const SamplePlan& plan,
                                   const CompleteCheckOptions& options) {
  if (cs.target()->dimension() != z.space()->dimension()) {
    throw std::invalid_argument("family '" + cs.family.name() + "' does not map into the space of '" + z.name() + "'");
  }
  const auto samples = generate_samples(plan, *cs.product());
  CheckReport report;
  report.check = "complete-slicing";
  report.system = z.name() + " / " + cs.family.name();
  report.tolerance = options.tolerance;
  report.citation = "each alpha_c with X_c is a slicing and alpha-bar covers P";
  if (!cs.fields) report.notes.push_back("X_c derived by least squares");

  std::vector<double> roundtrip(samples.size(), 0.0);
  record_each(report, samples, [&](std::size_t i, const Vector& w) {
    const Matrix j = base_block(cs, w);
    const Vector target = z(cs.family(w));
    const Vector x = cs.fields ? (*cs.fields)(w) : least_squares_field(j, target, cs.family.name());
    if (cs.inverse) {
      try {
        roundtrip[i] = cs.product()->difference((*cs.inverse)(cs.family(w)), w).norm();
      } catch (const std::exception&) {
        roundtrip[i] = kInf;
      }
    }
    return (j * x - target).norm();
  });

  if (cs.inverse) {
    const double rt = samples.empty() ? 0.0 : *std::max_element(roundtrip.begin(), roundtrip.end());
    report.metrics["inverse_roundtrip_max"] = rt;
    if (!(rt <= kCoverTolerance)) report.notes.push_back("declared inverse fails the round trip: " + format_real(rt));
  }

  if (options.coverage) {
    const auto points = generate_samples(*options.coverage, *cs.target());
    FamilySeeds seeds;
    if (!cs.inverse) seeds = make_seeds(cs, options.newton);
    std::vector<char> covered(points.size(), 0);
    parallel_for(points.size(), [&](std::size_t i) {
      const Vector& p = points[i];
      try {
        std::optional<Vector> w;
        if (cs.inverse) {
          w = (*cs.inverse)(p);
          if (!cs.product()->contains(cs.product()->canonicalize(*w)) ||
              !(family_gap(cs, *w, p) <= kCoverTolerance * std::max(1.0, p.norm()))) {
            w.reset();
          }
        } else {
          w = invert_family(cs, p, seeds, options.newton);
        }
        covered[i] = w.has_value();
      } catch (const std::exception&) {
      }
    });
    const auto hits = static_cast<double>(std::count(covered.begin(), covered.end(), 1));
    report.metrics["coverage_fraction"] = hits / static_cast<double>(points.size());
    report.notes.push_back("coverage is a sampled estimate, not a proof of surjectivity");
  }
  report.finalize();
  return report;
}

ConstantFromComplete constant_from_complete(const CompleteSlicing& cs, const DynamicalSystem& system,
                                            const SamplePlan& plan, const ConstantCheckOptions& options,
                                            const NewtonOptions& newton) {
  const Eigen::Index m = cs.base_dim();
  const Eigen::Index n = cs.parameters->dimension();
  const std::string name = "F[" + cs.family.name() + "]";
  std::optional<SmoothMap> f;
  if (cs.inverse && cs.inverse->has_expressions()) {
    std::vector<Expression> comps(cs.inverse->components().begin() + m, cs.inverse->components().end());
    f.emplace(name, cs.inverse->source(), cs.parameters, std::move(comps));
  } else if (cs.inverse) {
    const SmoothMap inv = *cs.inverse;
    f.emplace(name, system.space, cs.parameters, [inv, m, n](const Vector& z) { return Vector(inv(z).segment(m, n)); });
  } else {
    auto seeds = std::make_shared<const FamilySeeds>(make_seeds(cs, newton));
    const CompleteSlicing copy = cs;
    f.emplace(name, system.space, cs.parameters, [copy, seeds, newton, m, n](const Vector& z) {
      const auto w = invert_family(copy, z, *seeds, newton);
      if (!w) throw std::runtime_error("Newton inversion of the family did not converge");
      return Vector(w->segment(m, n));
    });
  }
  const ConstantMode mode = f->has_expressions() ? ConstantMode::infinitesimal : ConstantMode::integral;
  CheckReport report = check_constant_of_motion(system, *f, plan, mode, options);
  report.citation = "F = pr_2 o alpha-bar^{-1} is a constant of the motion";
  return {std::move(*f), std::move(report)};
}

namespace {

struct FlowPath {
  std::vector<double> times;  // increasing
  std::vector<Vector> points;
  std::vector<Vector> velocities;
};

FlowPath trace(const DynamicalSystem& system, const Vector& start, double t_end, double dt, double tolerance) {
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(t_end) / dt - 1e-9));
  const double dir = t_end < 0.0 ? -1.0 : 1.0;
  FlowPath path;
  if (n == 0) {
    path.times = {0.0};
    path.points = {start};
  } else {
    IntegrationOptions io;
    io.tolerance = tolerance;
    io.canonicalize = false;
    for (std::size_t k = 0; k <= n; ++k) io.checkpoints.push_back(dir * dt * static_cast<double>(k));
    const Trajectory traj = integrate(system, start, dir * dt * static_cast<double>(n), io);
    if (traj.truncated || traj.times.size() != n + 1) {
      throw std::domain_error("integral curve leaves the domain before t = " + format_real(t_end));
    }
    path.times = traj.times;
    path.points = traj.points;
  }
  for (const auto& p : path.points) path.velocities.push_back(system.field(p));
  return path;
}

Vector hermite(const FlowPath& path, double t) {
  if (path.times.size() == 1) return path.points.front();
  const auto& ts = path.times;
  if (t < ts.front() - 1e-12 || t > ts.back() + 1e-12) throw std::domain_error("time outside the stored flow");
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t k = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  k = std::min(k, ts.size() - 2);
  const double h = ts[k + 1] - ts[k];
  const double s = (t - ts[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * path.points[k] + (s3 - 2 * s2 + s) * h * path.velocities[k] +
         (-2 * s3 + 3 * s2) * path.points[k + 1] + (s3 - s2) * h * path.velocities[k + 1];
}

FlowPath join(const FlowPath& backward, const FlowPath& forward) {
  FlowPath out = backward;
  for (std::size_t i = 1; i < forward.times.size(); ++i) {
    out.times.push_back(forward.times[i]);
    out.points.push_back(forward.points[i]);
    out.velocities.push_back(forward.velocities[i]);
  }
  return out;
}

using FlowStore = std::map<std::vector<double>, FlowPath>;

}  // namespace

CompleteSlicing straighten_local(const DynamicalSystem& system, const SmoothMap& transversal, const SamplePlan& plan,
                                 const StraightenOptions& options) {
  const SpaceRef& n_space = transversal.source();
  const Eigen::Index n = n_space->dimension();
  if (transversal.target()->dimension() != system.space->dimension()) {
    throw std::invalid_argument("transversal '" + transversal.name() + "' does not map into the phase space");
  }
  if (n + 1 != system.space->dimension()) throw std::invalid_argument("transversal must be a hypersurface");
  if (!(options.t_min <= 0.0 && options.t_max >= 0.0 && options.dt > 0.0)) {
    throw std::invalid_argument("straighten_local needs t_min <= 0 <= t_max and dt > 0");
  }

  const auto samples = generate_samples(plan, *n_space);
  auto store = std::make_shared<FlowStore>();
  for (const auto& s : samples) {
    const Vector p = transversal(s);
    const Vector zp = system.field(p);
    if (zp.norm() < 1e-12) throw CriticalPoint("Z vanishes on the transversal at s = " + format_real(s[0]));
    Matrix aug(p.size(), n + 1);
    aug << jacobian(transversal, s), zp;
    if (numerical_rank(aug) < n + 1) {
      throw TransversalityFailure("Z is tangent to the transversal at s = " + format_real(s[0]));
    }
  }
  std::vector<FlowPath> paths(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Vector p = transversal(samples[i]);
    paths[i] = join(trace(system, p, options.t_min, options.dt, options.integrator_tolerance),
                    trace(system, p, options.t_max, options.dt, options.integrator_tolerance));
  });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    store->emplace(std::vector<double>(samples[i].data(), samples[i].data() + n), std::move(paths[i]));
  }

  std::string t_name = "t";
  while (n_space->index_of(t_name)) t_name += "_";
  auto m_space = std::make_shared<CoordinateSpace>("time", std::vector<std::string>{t_name});
  m_space->set_bounds({{options.t_min, options.t_max}});
  const SpaceRef product = product_space("time x " + n_space->name(), *m_space, *n_space);

  std::shared_ptr<const FlowStore> frozen = std::move(store);
  const DynamicalSystem sys = system;
  const SmoothMap tr = transversal;
  const StraightenOptions opts = options;
  SmoothMap family("flow[" + transversal.name() + "]", product, system.space, [frozen, sys, tr, opts, n](const Vector& w) {
    const double t = w[0];
    const Vector s = w.tail(n);
    const auto hit = frozen->find(std::vector<double>(s.data(), s.data() + n));
    if (hit != frozen->end() && t >= hit->second.times.front() - 1e-12 && t <= hit->second.times.back() + 1e-12) {
      return hermite(hit->second, t);
    }
    return hermite(trace(sys, tr(s), t, opts.dt, opts.integrator_tolerance), t);
  });
  SmoothMap fields = SmoothMap::parse("d/d" + t_name, product, m_space, {"1"});
  return CompleteSlicing(m_space, n_space, std::move(family), std::nullopt, std::move(fields));
}

Slicing gauge_transform(const Slicing& s, const VectorField& z, const SmoothMap& phi,
                        const std::optional<SmoothMap>& phi_inverse, const std::vector<Vector>& check_points) {
  const SpaceRef& m_prime = phi.source();
  if (phi.target()->dimension() != s.base()->dimension() || m_prime->dimension() != s.base()->dimension()) {
    throw std::invalid_argument("gauge map '" + phi.name() + "' is not a map M' -> M of equal dimension");
  }
  for (const auto& xp : check_points) {
    checked_inverse(jacobian(phi, xp), "Jacobian of '" + phi.name() + "' at " + format_real(xp[0]));
    if (phi_inverse) {
      const double gap = m_prime->difference((*phi_inverse)(phi(xp)), xp).norm();
      if (!(gap <= 1e-8)) throw std::invalid_argument("declared inverse of '" + phi.name() + "' fails the round trip");
    }
  }
  const Slicing original = s;
  const SmoothMap g = phi;
  const VectorField zf = z;
  VectorField pulled(phi.name() + "^*X", m_prime, [original, g, zf](const Vector& xp) {
    const Matrix jinv = checked_inverse(jacobian(g, xp), "Jacobian of '" + g.name() + "'");
    return Vector(jinv * slicing_field_at(original, zf, g(xp)));
  });
  return Slicing{compose(s.map, phi, s.map.name() + " o " + phi.name()), std::move(pulled)};
}

void write_complete_csv(std::ostream& out, const CompleteSlicing& cs, const SamplePlan& plan) {
  const auto samples = generate_samples(plan, *cs.product());
  const auto m = static_cast<std::size_t>(cs.base_dim());
  const auto& names = cs.product()->coordinates();
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (std::size_t i = m; i < names.size(); ++i) sep(), out << names[i];
  for (std::size_t i = 0; i < m; ++i) sep(), out << names[i];
  for (const auto& c : cs.target()->coordinates()) sep(), out << c;
  out << '\n';
  std::vector<std::optional<Vector>> images(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    try {
      images[i] = cs.family(samples[i]);
    } catch (const std::exception&) {
    }
  });
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!images[k]) continue;
    const Vector& w = samples[k];
    first = true;
    for (Eigen::Index i = static_cast<Eigen::Index>(m); i < w.size(); ++i) sep(), out << format_real(w[i]);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) sep(), out << format_real(w[i]);
    for (Eigen::Index i = 0; i < images[k]->size(); ++i) sep(), out << format_real((*images[k])[i]);
    out << '\n';
  }
}

}  // namespace slicekit
