#pragma once

// Dynamical systems (P, Z): integral curves, sampling, constants of the
// motion and tangency of submanifolds.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "slicekit/geometry.hpp"
#include "slicekit/report.hpp"

namespace slicekit {

struct DynamicalSystem {
  SpaceRef space;
  VectorField field;

  DynamicalSystem(SpaceRef space, VectorField field);
};

enum class SampleStrategy { grid, random };

struct SamplePlan {
  SampleStrategy strategy = SampleStrategy::random;
  std::vector<Interval> bounds;  // empty: use the space's bounds
  std::size_t count = 200;
  std::uint64_t seed = 0;
};

/// In-domain sample points. Random plans use rejection sampling from a
/// seeded 64-bit Mersenne twister; grids use k = floor(count^(1/d)) points
/// per axis, endpoints included, out-of-domain nodes dropped.
std::vector<Vector> generate_samples(const SamplePlan& plan, const CoordinateSpace& space);

enum class Method { rk4, rk45 };

struct IntegrationOptions {
  Method method = Method::rk45;
  double step = 1e-2;        // rk4 step, rk45 initial step
  double tolerance = 1e-10;  // rk45 local error (absolute and relative)
  double min_step = 1e-14;
  std::size_t max_steps = 2'000'000;
  /// Times (same sign as t_end) that must appear in the trajectory. When
  /// non-empty only these times are recorded.
  std::vector<double> checkpoints;
  /// Store periodic coordinates wrapped; off keeps the unwrapped curve.
  bool canonicalize = true;
};

class StepUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  std::vector<double> times;  // strictly increasing
  std::vector<Vector> points;  // canonical coordinates
  Method method = Method::rk45;
  double step = 0.0;
  double max_error_estimate = 0.0;
  bool truncated = false;
  std::string status = "ok";
};

/// Approximates the integral curve through x0 up to t_end (which may be
/// negative). Halts with `truncated` set when the curve leaves the domain.
Trajectory integrate(const DynamicalSystem& system, const Vector& x0, double t_end, const IntegrationOptions& options = {});

/// CSV with header "t,<coords>".
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const CoordinateSpace& space);

/// L_Z f (x) = df(x) . Z(x).
double lie_derivative(const VectorField& field, const Expression& f, const Vector& x);

enum class ConstantMode { infinitesimal, integral };

struct ConstantCheckOptions {
  double tolerance = 1e-8;
  double horizon = 10.0;
  std::size_t checkpoints = 50;
  double integrator_tolerance = 1e-10;
};

/// Infinitesimal: |TF . Z| at each sample. Integral: max drift of F along
/// the integral curve from each sample, period-aware on F's target.
CheckReport check_constant_of_motion(const DynamicalSystem& system, const SmoothMap& constant, const SamplePlan& plan,
                                     ConstantMode mode, const ConstantCheckOptions& options = {});

struct TangencyReport {
  CheckReport report;
  std::vector<Vector> fields;  // least-squares v per sample (empty on failure)
};

/// min_v |J_alpha(x) v - Z(alpha(x))| per sample of M.
TangencyReport check_tangency(const VectorField& field, const SmoothMap& embedding, const SamplePlan& plan,
                              double tolerance = 1e-8);
TangencyReport check_tangency(const VectorField& field, const SmoothMap& embedding, const std::vector<Vector>& samples,
                              double tolerance = 1e-8);

/// |d(alpha^* h)| per sample; metric "spread" = max - min of h o alpha.
CheckReport check_constant_on_image(const Expression& h, const SmoothMap& alpha, const SamplePlan& plan,
                                    double tolerance = 1e-8);

}  // namespace slicekit
