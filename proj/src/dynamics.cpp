#include "slicekit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "slicekit/linalg.hpp"
#include "slicekit/parallel.hpp"

namespace slicekit {

DynamicalSystem::DynamicalSystem(SpaceRef s, VectorField f) : space(std::move(s)), field(std::move(f)) {
  if (field.space()->dimension() != space->dimension()) {
    throw std::invalid_argument("field '" + field.name() + "' does not live on space '" + space->name() + "'");
  }
}

namespace {

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Vector> generate_samples(const SamplePlan& plan, const CoordinateSpace& space) {
  const auto& bounds = plan.bounds.empty() ? space.bounds() : plan.bounds;
  const auto dim = space.dimension();
  if (static_cast<Eigen::Index>(bounds.size()) != dim) throw std::invalid_argument("sample plan bounds do not match dimension");
  std::vector<Vector> out;
  if (plan.count == 0) return out;

  if (plan.strategy == SampleStrategy::random) {
    std::mt19937_64 gen(plan.seed);
    const std::size_t max_attempts = 1000 * plan.count + 1000;
    for (std::size_t attempt = 0; attempt < max_attempts && out.size() < plan.count; ++attempt) {
      Vector x(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        const auto& b = bounds[static_cast<std::size_t>(i)];
        x[i] = b.lo + (b.hi - b.lo) * uniform01(gen);
      }
      if (space.contains(x)) out.push_back(space.canonicalize(std::move(x)));
    }
  } else {
    auto per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(plan.count), 1.0 / static_cast<double>(dim)) + 1e-9));
    per_axis = std::max<std::size_t>(per_axis, 1);
    std::size_t total = 1;
    for (Eigen::Index i = 0; i < dim; ++i) total *= per_axis;
    for (std::size_t flat = 0; flat < total; ++flat) {
      Vector x(dim);
      std::size_t rem = flat;
      for (Eigen::Index i = dim - 1; i >= 0; --i) {
        const std::size_t k = rem % per_axis;
        rem /= per_axis;
        const auto& b = bounds[static_cast<std::size_t>(i)];
        x[i] = per_axis == 1 ? 0.5 * (b.lo + b.hi)
                             : b.lo + (b.hi - b.lo) * static_cast<double>(k) / static_cast<double>(per_axis - 1);
      }
      if (space.contains(x)) out.push_back(space.canonicalize(std::move(x)));
    }
  }
  if (out.empty()) throw std::runtime_error("sample plan produced no in-domain points for space '" + space.name() + "'");
  return out;
}

namespace {

struct StepResult {
  Vector y;
  double error = 0.0;  // scaled error norm (rk45), 0 for rk4
};

StepResult rk4_step(const VectorField& f, const Vector& y, double h) {
  const Vector k1 = f(y);
  const Vector k2 = f(y + 0.5 * h * k1);
  const Vector k3 = f(y + 0.5 * h * k2);
  const Vector k4 = f(y + h * k3);
  return {y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0};
}

StepResult dopri_step(const VectorField& f, const Vector& y, double h, double tol) {
  const Vector k1 = f(y);
  const Vector k2 = f(y + h * (1.0 / 5.0) * k1);
  const Vector k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const Vector k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const Vector k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const Vector k6 = f(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                               5103.0 / 18656.0 * k5));
  const Vector y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                             11.0 / 84.0 * k6);
  const Vector k7 = f(y5);
  const Vector err = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3 +
                          (125.0 / 192.0 - 393.0 / 640.0) * k4 + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5 +
                          (11.0 / 84.0 - 187.0 / 2100.0) * k6 - 1.0 / 40.0 * k7);
  double norm = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
    norm = std::max(norm, std::abs(err[i]) / scale);
  }
  return {y5, norm};
}

}  // namespace

Trajectory integrate(const DynamicalSystem& system, const Vector& x0, double t_end, const IntegrationOptions& options) {
  require_in_domain(*system.space, x0);
  const CoordinateSpace& space = *system.space;
  const double dir = t_end < 0.0 ? -1.0 : 1.0;

  Trajectory traj;
  traj.method = options.method;
  traj.step = options.step;

  std::vector<double> checkpoints = options.checkpoints;
  for (double c : checkpoints) {
    if (c * dir < 0.0 || std::abs(c) > std::abs(t_end) * (1 + 1e-15)) {
      throw std::invalid_argument("checkpoint outside the integration interval");
    }
  }
  std::sort(checkpoints.begin(), checkpoints.end(), [dir](double a, double b) { return a * dir < b * dir; });
  const bool all_steps = checkpoints.empty();
  std::size_t next_cp = 0;

  auto record = [&](double t, const Vector& y) {
    traj.times.push_back(t);
    traj.points.push_back(options.canonicalize ? space.canonicalize(y) : y);
  };

  double t = 0.0;
  Vector y = x0;
  if (all_steps) {
    record(t, y);
  } else {
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == 0.0) {
      record(0.0, y);
      ++next_cp;
    }
  }

  auto finish = [&]() {
    if (dir < 0.0) {
      std::reverse(traj.times.begin(), traj.times.end());
      std::reverse(traj.points.begin(), traj.points.end());
    }
    return traj;
  };

  if (t_end == 0.0) return finish();

  double h = dir * std::min(std::abs(options.step), std::abs(t_end));
  if (options.method == Method::rk4) {
    const auto n = static_cast<std::size_t>(std::ceil(std::abs(t_end) / std::abs(options.step) - 1e-12));
    h = t_end / static_cast<double>(std::max<std::size_t>(n, 1));
  }

  std::size_t steps = 0;
  while ((t_end - t) * dir > 0.0) {
    if (++steps > options.max_steps) throw StepUnderflow("integration exceeded the maximum step count");
    double target = t_end;
    if (!all_steps && next_cp < checkpoints.size()) target = checkpoints[next_cp];
    double hs = h;
    bool clamped = false;
    if ((t + hs - target) * dir > 0.0) {
      hs = target - t;
      clamped = true;
    }

    StepResult step;
    try {
      step = options.method == Method::rk4 ? rk4_step(system.field, y, hs) : dopri_step(system.field, y, hs, options.tolerance);
    } catch (const DomainError& e) {
      traj.truncated = true;
      traj.status = std::string("domain-exit: ") + e.what();
      return finish();
    }

    if (options.method == Method::rk45) {
      if (!std::isfinite(step.error) || step.error > 1.0) {
        const double factor = std::isfinite(step.error) ? std::max(0.2, 0.9 * std::pow(step.error, -0.2)) : 0.2;
        h = hs * factor;
        if (std::abs(h) < options.min_step) throw StepUnderflow("rk45 step size underflow at t=" + std::to_string(t));
        continue;
      }
      traj.max_error_estimate = std::max(traj.max_error_estimate, step.error * options.tolerance);
      const double factor = step.error == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(step.error, -0.2), 0.2, 5.0);
      if (!clamped) {
        h = hs * factor;
      } else {
        h = (std::abs(h) > std::abs(hs) ? h : hs * factor);
      }
    }

    t = clamped ? target : t + hs;
    y = step.y;
    if (!space.contains(space.canonicalize(y))) {
      traj.truncated = true;
      traj.status = "domain-exit at t=" + format_real(t);
      return finish();
    }
    if (all_steps) {
      record(t, y);
    } else {
      while (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
        record(t, y);
        ++next_cp;
      }
    }
  }
  return finish();
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const CoordinateSpace& space) {
  out << 't';
  for (const auto& c : space.coordinates()) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out << format_real(trajectory.times[i]);
    for (Eigen::Index k = 0; k < trajectory.points[i].size(); ++k) out << ',' << format_real(trajectory.points[i][k]);
    out << '\n';
  }
}

double lie_derivative(const VectorField& field, const Expression& f, const Vector& x) {
  return gradient(f, x).dot(field(x));
}

CheckReport check_constant_of_motion(const DynamicalSystem& system, const SmoothMap& constant, const SamplePlan& plan,
                                     ConstantMode mode, const ConstantCheckOptions& options) {
  if (constant.source()->dimension() != system.space->dimension()) {
    throw std::invalid_argument("constant '" + constant.name() + "' is not defined on the phase space");
  }
  const auto samples = generate_samples(plan, *system.space);
  CheckReport report;
  report.check = mode == ConstantMode::infinitesimal ? "constant-of-motion/infinitesimal" : "constant-of-motion/integral";
  report.system = system.field.name() + " / " + constant.name();
  report.tolerance = options.tolerance;
  report.citation = "each integral curve lies in a level set of F";
  report.samples.resize(samples.size());

  std::vector<std::string> notes(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Vector& x = samples[i];
    SampleRecord& rec = report.samples[i];
    rec.point = x;
    try {
      if (mode == ConstantMode::infinitesimal) {
        rec.residual = (jacobian(constant, x) * system.field(x)).norm();
        return;
      }
      IntegrationOptions io;
      io.method = Method::rk45;
      io.tolerance = options.integrator_tolerance;
      for (std::size_t k = 0; k <= options.checkpoints; ++k) {
        io.checkpoints.push_back(options.horizon * static_cast<double>(k) / static_cast<double>(options.checkpoints));
      }
      const Trajectory traj = integrate(system, x, options.horizon, io);
      const Vector f0 = constant(traj.points.front());
      double drift = 0.0;
      for (const auto& p : traj.points) {
        drift = std::max(drift, constant.target()->difference(constant(p), f0).norm());
      }
      rec.residual = drift;
      if (traj.truncated) notes[i] = "sample " + std::to_string(i) + ": " + traj.status;
    } catch (const std::exception& e) {
      rec.residual = std::numeric_limits<double>::infinity();
      rec.error = e.what();
    }
  });
  for (auto& n : notes) {
    if (!n.empty()) report.notes.push_back(std::move(n));
  }
  if (mode == ConstantMode::integral) {
    report.metrics["horizon"] = options.horizon;
    report.metrics["integrator_tolerance"] = options.integrator_tolerance;
  }
  report.finalize();
  return report;
}

TangencyReport check_tangency(const VectorField& field, const SmoothMap& embedding, const SamplePlan& plan, double tolerance) {
  return check_tangency(field, embedding, generate_samples(plan, *embedding.source()), tolerance);
}

TangencyReport check_tangency(const VectorField& field, const SmoothMap& embedding, const std::vector<Vector>& samples,
                              double tolerance) {
  TangencyReport out;
  CheckReport& report = out.report;
  report.check = "tangency";
  report.system = field.name() + " / " + embedding.name();
  report.tolerance = tolerance;
  report.citation = "Z is tangent to alpha(M)";
  report.samples.resize(samples.size());
  out.fields.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Vector& x = samples[i];
    SampleRecord& rec = report.samples[i];
    rec.point = x;
    try {
      const Matrix j = jacobian(embedding, x);
      const LeastSquares ls = least_squares(j, field(embedding(x)));
      if (!ls.full_column_rank) {
        rec.residual = std::numeric_limits<double>::infinity();
        rec.error = "rank-deficient Jacobian (rank " + std::to_string(ls.rank) + " < " + std::to_string(j.cols()) +
                    "): not an immersion";
        return;
      }
      rec.residual = ls.residual;
      out.fields[i] = ls.solution;
    } catch (const std::exception& e) {
      rec.residual = std::numeric_limits<double>::infinity();
      rec.error = e.what();
    }
  });
  report.finalize();
  return out;
}

CheckReport check_constant_on_image(const Expression& h, const SmoothMap& alpha, const SamplePlan& plan,
                                    double tolerance) {
  const auto samples = generate_samples(plan, *alpha.source());
  const Expression f =
      h.variables() == alpha.target()->coordinates() ? h : h.rebind(alpha.target()->coordinates());
  CheckReport report;
  report.check = "constant-on-image";
  report.system = f.to_string() + " / " + alpha.name();
  report.tolerance = tolerance;
  report.citation = "H o alpha is constant";
  report.samples.resize(samples.size());
  std::vector<double> values(samples.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(samples.size(), [&](std::size_t i) {
    SampleRecord& rec = report.samples[i];
    rec.point = samples[i];
    try {
      const PullbackValue pv = pullback_function(alpha, f, samples[i]);
      values[i] = pv.value;
      rec.residual = pv.differential.norm();
    } catch (const std::exception& e) {
      rec.residual = std::numeric_limits<double>::infinity();
      rec.error = e.what();
    }
  });
  report.finalize();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo <= hi) report.metrics["spread"] = hi - lo;
  return report;
}

}  // namespace slicekit
