#pragma once

#include "sdde/integrator.hpp"
#include "sdde/segment.hpp"

namespace sdde {

// Spectral projection onto the one-dimensional center space of the
// linearization, available when the critical root at 0 is simple (a != 1).
// The center coordinate of a history phi is
//     z = [phi(0) - a * int_{-1}^{0} phi] / (1 - a),
// the unique functional that fixes the constant basis function, kills the
// remaining spectral directions, and is constant along the linear flow.
class CenterBasis {
public:
  explicit CenterBasis(double a); // DegenerateProjection when |1 - a| < 1e-9

  double a() const { return a_; }

  // The basis function eta_0 == 1 on [-h, 0].
  Segment basis_segment(double h = 1.0,
                        int n_nodes = Segment::kDefaultIntervals + 1) const;

private:
  double a_;
};

// Quadrature path: order-32 Gauss-Legendre on every node interval of phi.
// Requires phi to cover [-1, 0].
double center_coordinate(const CenterBasis& basis, const Segment& phi);

// Trajectory path: the integral over [t-1, t] is taken piecewise between the
// knots of the dense representation, where the integrand is a single cubic,
// so no resampling error enters.
double center_coordinate(const CenterBasis& basis, const Trajectory& tr,
                         double t);

// z * eta_0 on phi's grid / on a fresh grid.
Segment project_center(const CenterBasis& basis, const Segment& phi);
Segment lift_center(const CenterBasis& basis, double z, double h = 1.0,
                    int n_nodes = Segment::kDefaultIntervals + 1);

} // namespace sdde
