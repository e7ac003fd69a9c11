#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdde/model.hpp"
#include "sdde/segment.hpp"
#include "sdde/spectrum.hpp"

namespace sdde {

enum class TrajectoryStatus { completed, blowup_stopped, step_failure };

struct IntegrateOptions {
  double dt = 1e-3;          // divides the unit delay so breaking points land
                             // on mesh knots
  double blowup_bound = 5.0; // stop once |x| reaches this
  double admissibility_tol = 1e-8;
  double residual_tol = 1e-6; // post-hoc defect bound at spot-check times
  int max_halvings = 3;       // whole-run retries with dt/2 on a failed check
  int residual_checks = 16;
  unsigned rng_seed = 0x5dde01u; // spot-check times are drawn reproducibly

  // Linear auxiliary runs track exponentially growing modes, so no blowup
  // cutoff by default.
  static IntegrateOptions for_linear() {
    IntegrateOptions o;
    o.blowup_bound = 1e18;
    return o;
  }
};

// Forward solution on [0, T] with dense C^1 output: cubic Hermite between
// mesh knots, the initial segment before 0.  Values interpolate the knot
// pairs (x, x'); derivatives interpolate (x', x'') with curvature knots from
// the equation's own chain rule, so both channels carry the full order of
// the stepper.
struct Trajectory {
  Segment initial;
  double dt = 0.0; // step size actually used (after any halvings)
  std::vector<double> ts, xs, ds;
  TrajectoryStatus status = TrajectoryStatus::completed;
  std::optional<Model> model;         // set for nonlinear runs
  std::optional<LinearCoeffs> linear; // set for linear runs

  double h() const { return initial.h(); }
  double end_time() const { return ts.empty() ? 0.0 : ts.back(); }
  // Dense evaluation on [-h, end_time()]; DomainError outside.
  double value(double t) const;
  double derivative(double t) const;

  hermite::Table forward;      // value channel, built once after stepping
  hermite::Table forward_rate; // derivative channel
};

// Method-of-steps RK4 for the full model.  Requires phi'(0) = f(phi) within
// admissibility_tol.  In-step delayed lookups that land in the provisional
// interval are resolved by fixed-point sweeps (<= 5, tolerance 1e-12).
Trajectory integrate(const Model& m, const Segment& phi, double T,
                     const IntegrateOptions& opts = {});

// Same stepper for v'(t) = A v(t) + B v(t-1) from arbitrary C^1 data.
Trajectory integrate_linear(const LinearCoeffs& lc, const Segment& phi,
                            double T,
                            const IntegrateOptions& opts =
                                IntegrateOptions::for_linear());

// v'(t) = a [v(t) - v(t-1)], the linearized model.
Trajectory integrate_linear(double a, const Segment& phi, double T,
                            const IntegrateOptions& opts =
                                IntegrateOptions::for_linear());

// |x'(t) - f(x_t)| (or the linear counterpart) at a single time.
double residual(const Trajectory& tr, double t);

// History segment x_t resampled from dense output; n_nodes = 0 picks a grid
// at least as fine as both the model grid and the integration mesh.
Segment segment_at(const Trajectory& tr, double t, int n_nodes = 0);

// CSV "t,x,xprime" at every mesh knot, or at multiples of `stride` (plus the
// final time) when stride > 0.
void write_trajectory_csv(std::ostream& out, const Trajectory& tr,
                          double stride = 0.0);
void write_trajectory_csv_file(const std::string& path, const Trajectory& tr,
                               double stride = 0.0);

const char* trajectory_status_name(TrajectoryStatus s);

} // namespace sdde
