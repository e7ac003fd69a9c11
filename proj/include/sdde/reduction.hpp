#pragma once

#include <string>
#include <vector>

#include "sdde/integrator.hpp"
#include "sdde/projection.hpp"

namespace sdde {

// One-dimensional reduced dynamics on the center manifold,
//     z' = -(1/(1-a)) |z| z + higher order.
// c_analytic below is 1/(1-a); c_fitted is recovered from trajectories.

double analytic_reduced_field(double a, double z);

struct ReducedCurve {
  std::vector<double> ts, zs;
  bool blowup = false;
};

// RK4 on the truncated reduced equation itself.
ReducedCurve integrate_reduced(double a, double z0, double T, double dt = 1e-3);

struct FitWindow {
  double z_lo = 0.0, z_hi = 0.0; // amplitude band actually used
  double t_start = 0.0, t_end = 0.0;
};

struct ReducedFit {
  double a = 0.0;
  double c_analytic = 0.0;
  double c_fitted = 0.0;
  // Combined uncertainty: scatter of the residuals plus the systematic
  // component read off their projection onto the next odd power, so the
  // interval c_fitted +/- 2*stderr_value covers truncation bias as well as
  // noise.
  double stderr_value = 0.0;
  int n_samples = 0;
  FitWindow window;
  double residual_max = 0.0; // max |z' + c_fitted |z| z| / z^2 over samples
};

struct FitOptions {
  double stride = 0.1;     // sampling stride for z(t) and central differences
  double z_abs_lo = 5e-3;  // amplitude band: samples with |z| outside are
  double z_abs_hi = 1.5e-2; //  dropped; the band stays small because the
                            //  neglected cubic term biases c linearly in z
  double transient = -1.0; // time cut before sampling; < 0 picks 5/|kappa(a)|
  int min_samples = 50;
};

// Recover the reduced field from full trajectories: sample the center
// coordinate along each run, differentiate by central differences, and
// least-squares the one-parameter law z' = -c |z| z through the samples.
ReducedFit fit_reduced_field(const std::vector<Trajectory>& runs,
                             const CenterBasis& basis,
                             const FitOptions& opts = {});

enum class LyapunovVerdict { STRICT_STABLE, STRICT_UNSTABLE, INDEFINITE };

// Sign of z * field(z) sampled on +/-[z_lo, z_hi]: negative everywhere means
// strictly decreasing energy, positive everywhere strictly increasing.
template <class Field>
LyapunovVerdict lyapunov_check(const Field& field, double z_lo, double z_hi,
                               int grid = 10000);

const char* lyapunov_verdict_name(LyapunovVerdict v);

// {a, c_analytic, c_fitted, stderr, n_samples, window, residual_max}
std::string fit_report_json(const ReducedFit& fit);

// ---- implementation of the template ----

namespace detail {
LyapunovVerdict lyapunov_scan(const std::function<double(double)>& field,
                              double z_lo, double z_hi, int grid);
}

template <class Field>
LyapunovVerdict lyapunov_check(const Field& field, double z_lo, double z_hi,
                               int grid) {
  return detail::lyapunov_scan(field, z_lo, z_hi, grid);
}

} // namespace sdde
