#include "sdde/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sdde/errors.hpp"

namespace sdde {

namespace {

// Nodes and weights of n-point Gauss-Legendre on [-1, 1], by Newton on the
// Legendre recurrence.
struct GaussRule {
  std::vector<double> x, w;
  explicit GaussRule(int n) : x(static_cast<size_t>(n)), w(x.size()) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / pp;
        z -= dz;
        if (std::fabs(dz) < 1e-15) break;
      }
      x[static_cast<size_t>(i)] = -z;
      x[static_cast<size_t>(n - 1 - i)] = z;
      w[static_cast<size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
      w[static_cast<size_t>(n - 1 - i)] = w[static_cast<size_t>(i)];
    }
  }

  template <class F> double integrate(const F& f, double lo, double hi) const {
    const double mid = 0.5 * (lo + hi);
    const double rad = 0.5 * (hi - lo);
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += w[i] * f(mid + rad * x[i]);
    return acc * rad;
  }
};

const GaussRule& gauss32() {
  static const GaussRule rule(32);
  return rule;
}

const GaussRule& gauss4() {
  static const GaussRule rule(4);
  return rule;
}

} // namespace

CenterBasis::CenterBasis(double a) : a_(a) {
  if (std::fabs(1.0 - a) < 1e-9)
    throw DegenerateProjection(
        "CenterBasis: critical root is not simple at a = 1");
}

Segment CenterBasis::basis_segment(double h, int n_nodes) const {
  return Segment::constant(1.0, h, n_nodes);
}

double center_coordinate(const CenterBasis& basis, const Segment& phi) {
  if (phi.h() < 1.0 - 1e-12)
    throw PreconditionError("center_coordinate: segment shorter than the lag");
  const auto& rule = gauss32();
  double integral = 0.0;
  for (int i = 0; i + 1 < phi.node_count(); ++i) {
    const double lo = std::max(phi.theta(i), -1.0);
    const double hi = phi.theta(i + 1);
    if (hi <= lo) continue;
    integral += rule.integrate([&](double th) { return phi.eval(th); }, lo, hi);
  }
  return (phi.eval(0.0) - basis.a() * integral) / (1.0 - basis.a());
}

double center_coordinate(const CenterBasis& basis, const Trajectory& tr,
                         double t) {
  if (t < 0.0 || t > tr.end_time() + 1e-12)
    throw PreconditionError("center_coordinate: t outside [0, end]");
  if (tr.h() < 1.0 - 1e-12)
    throw PreconditionError("center_coordinate: history shorter than the lag");

  const double lo = t - 1.0;
  const double hi = t;

  // Breakpoints: every knot of the piecewise-cubic representation that falls
  // inside the window, so each quadrature piece is a single polynomial.
  std::vector<double> cuts;
  cuts.push_back(lo);
  if (lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
  const auto collect = [&](const std::vector<double>& knots) {
    auto first = std::upper_bound(knots.begin(), knots.end(), lo + 1e-15);
    auto last = std::lower_bound(knots.begin(), knots.end(), hi - 1e-15);
    for (auto it = first; it != last; ++it) cuts.push_back(*it);
  };
  collect(tr.initial.table().xs());
  if (tr.forward.size() >= 2) collect(tr.forward.xs());
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  const auto& rule = gauss4();
  double integral = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-15) continue;
    integral += rule.integrate([&](double u) { return tr.value(u); }, cuts[i],
                               cuts[i + 1]);
  }
  return (tr.value(t) - basis.a() * integral) / (1.0 - basis.a());
}

Segment project_center(const CenterBasis& basis, const Segment& phi) {
  const double z = center_coordinate(basis, phi);
  return z * basis.basis_segment(phi.h(), phi.node_count());
}

Segment lift_center(const CenterBasis& basis, double z, double h,
                    int n_nodes) {
  return z * basis.basis_segment(h, n_nodes);
}

} // namespace sdde
