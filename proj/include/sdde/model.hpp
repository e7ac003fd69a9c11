#pragma once

#include "sdde/delay.hpp"
#include "sdde/segment.hpp"

namespace sdde {

// The exchange-rate model x'(t) = a [x(t) - x(t - r(x(t)))] - |x(t)| x(t)
// with feedback gain a > 0 and state-dependent delay r.
struct Model {
  double a = 1.0;
  DelayFunction delay = DelayFunction::constant(1.0);
  double h = 1.0;            // history length; must dominate sup r
  int grid_nodes = Segment::kDefaultIntervals + 1;
  double domain_radius = 10.0; // admissible data live in norm_c1 < this

  // Throws ModelViolation when a <= 0 or a delay hypothesis fails.
  void validate() const;
};

// Right-hand side f(phi) evaluated on a history segment.  Throws
// ModelViolation if the delay escapes (0, h].
double rhs_f(const Model& m, const Segment& phi);

// The linearization at 0 and the remainder, split so that
// rhs_f = linear_part + nonlinear_part pointwise.
double linear_part(const Model& m, const Segment& phi);
double nonlinear_part(const Model& m, const Segment& phi);

// Kernel form used by the stepper: everything except the delay lookup.
double rhs_pointwise(const Model& m, double x_now, double x_delayed);

// Time derivative of f along a solution: d/dt f(x_t) given x(t), x'(t), and
// the delayed derivative x'(t - r(x(t))).  Feeds the curvature knots of the
// dense derivative channel.
double rhs_rate(const Model& m, double x_now, double d_now, double d_delayed);

// Initial data compatible with the model: phi'(0) = f(phi), phi(0) = eps.
// Affine profile for a < 1; for a > 1 an exponential profile aligned with
// the unstable direction, corrected by a linear-in-theta term.  Residual at
// the returned segment is below 1e-12 * max(1, |eps|).
Segment make_admissible(const Model& m, double eps);

// Add the right multiple of theta to an arbitrary segment so the
// compatibility condition holds; used to perturb admissible data without
// leaving the solution manifold.
Segment correct_to_admissible(const Model& m, const Segment& base);

} // namespace sdde
