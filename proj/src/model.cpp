#include "sdde/model.hpp"

#include <cmath>
#include <string>

#include "sdde/errors.hpp"
#include "sdde/spectrum.hpp"

namespace sdde {

void Model::validate() const {
  if (!(a > 0.0)) throw ModelViolation("model: a must be > 0");
  if (!(h > 0.0)) throw ModelViolation("model: h must be > 0");
  if (grid_nodes < 2) throw ModelViolation("model: grid_nodes must be >= 2");
  if (!(domain_radius > 0.0))
    throw ModelViolation("model: domain_radius must be > 0");
  const DelayValidation v = validate_delay(delay);
  if (!v.all_pass()) {
    std::string why = "model: delay hypothesis failed:";
    for (const HypothesisCheck* c :
         {&v.smooth, &v.range, &v.even, &v.normalized})
      if (!c->pass)
        why += " " + (c->detail.empty() ? std::string("unnamed") : c->detail) +
               ";";
    throw ModelViolation(why);
  }
  if (delay.r0() > h * (1.0 + 1e-12))
    throw ModelViolation("model: r(0) exceeds the history length h");
}

double rhs_pointwise(const Model& m, double x_now, double x_delayed) {
  return m.a * (x_now - x_delayed) - std::fabs(x_now) * x_now;
}

double rhs_rate(const Model& m, double x_now, double d_now, double d_delayed) {
  // chain rule through the deviated argument: d/dt x(t - r(x(t))) =
  // x'(t - r) * (1 - r'(x) x'); |x|x differentiates to 2|x| x'
  const double lag_rate = 1.0 - m.delay.derivative(x_now) * d_now;
  return m.a * (d_now - d_delayed * lag_rate) -
         2.0 * std::fabs(x_now) * d_now;
}

static double checked_delay(const Model& m, double x_now) {
  const double r = m.delay(x_now);
  if (!(r > 0.0) || r > m.h * (1.0 + 1e-12))
    throw ModelViolation("rhs: delay left (0, h] at x = " +
                         std::to_string(x_now));
  return r;
}

double rhs_f(const Model& m, const Segment& phi) {
  const double x0 = phi.eval(0.0);
  const double r = checked_delay(m, x0);
  return rhs_pointwise(m, x0, phi.eval(-r));
}

double linear_part(const Model& m, const Segment& phi) {
  const double r0 = m.delay.r0();
  return m.a * (phi.eval(0.0) - phi.eval(-r0));
}

double nonlinear_part(const Model& m, const Segment& phi) {
  const double x0 = phi.eval(0.0);
  const double r = checked_delay(m, x0);
  const double r0 = m.delay.r0();
  return m.a * (phi.eval(-r0) - phi.eval(-r)) - std::fabs(x0) * x0;
}

namespace {

double admissibility_residual(const Model& m, const Segment& phi) {
  return phi.eval_derivative(0.0) - rhs_f(m, phi);
}

Segment affine_admissible(const Model& m, double eps) {
  const double r_eps = m.delay(eps);
  const double slope_coef = 1.0 - m.a * r_eps;
  if (std::fabs(slope_coef) < 1e-9)
    throw ConstructionError(
        "make_admissible: compatibility equation degenerate (a * r(eps) = 1)");
  const double beta = -eps * std::fabs(eps) / slope_coef;
  return Segment::from_function([=](double th) { return eps + beta * th; },
                                [=](double) { return beta; }, m.h,
                                m.grid_nodes);
}

Segment exponential_admissible(const Model& m, double eps) {
  const double kappa = *real_root_kappa(m.a);
  const double r_eps = m.delay(eps);
  const double slope_coef = 1.0 - m.a * r_eps;
  if (std::fabs(slope_coef) < 1e-9)
    throw ConstructionError(
        "make_admissible: compatibility equation degenerate (a * r(eps) = 1)");

  auto build = [&](double beta) {
    return Segment::from_function(
        [=](double th) { return eps * std::exp(kappa * th) + beta * th; },
        [=](double th) { return eps * kappa * std::exp(kappa * th) + beta; },
        m.h, m.grid_nodes);
  };

  // The residual is affine in beta (the profile enters the right-hand side
  // linearly through the fixed lookup point -r(eps)), so Newton lands in one
  // or two steps; iterating against the sampled segment keeps the final
  // residual at interpolation-free accuracy.
  double beta = 0.0;
  Segment seg = build(beta);
  for (int it = 0; it < 50; ++it) {
    const double res = admissibility_residual(m, seg);
    if (std::fabs(res) <= 1e-13 * std::max(1.0, std::fabs(eps))) return seg;
    beta -= res / slope_coef;
    seg = build(beta);
  }
  if (std::fabs(admissibility_residual(m, seg)) <=
      1e-12 * std::max(1.0, std::fabs(eps)))
    return seg;
  throw ConstructionError("make_admissible: Newton on beta did not converge");
}

} // namespace

Segment make_admissible(const Model& m, double eps) {
  m.validate();
  if (eps == 0.0) return Segment::zero(m.h, m.grid_nodes);

  Segment seg = m.a > 1.0 ? exponential_admissible(m, eps)
                          : affine_admissible(m, eps);

  const double res = admissibility_residual(m, seg);
  if (std::fabs(res) > 1e-12 * std::max(1.0, std::fabs(eps)))
    throw ConstructionError("make_admissible: residual " +
                            std::to_string(res) + " above tolerance");
  if (!(seg.norm_c1() < m.domain_radius))
    throw ConstructionError(
        "make_admissible: profile left the admissible ball");
  return seg;
}

Segment correct_to_admissible(const Model& m, const Segment& base) {
  const double x0 = base.eval(0.0);
  const double r = checked_delay(m, x0);
  const double slope_coef = 1.0 - m.a * r;
  if (std::fabs(slope_coef) < 1e-9)
    throw ConstructionError(
        "correct_to_admissible: compatibility equation degenerate");

  const Segment ramp = Segment::from_function(
      [](double th) { return th; }, [](double) { return 1.0; }, base.h(),
      base.node_count());

  double gamma = 0.0;
  Segment seg = base;
  for (int it = 0; it < 50; ++it) {
    const double res = admissibility_residual(m, seg);
    if (std::fabs(res) <= 1e-13 * std::max(1.0, std::fabs(x0))) return seg;
    gamma -= res / slope_coef;
    seg = base + gamma * ramp;
  }
  if (std::fabs(admissibility_residual(m, seg)) <=
      1e-12 * std::max(1.0, std::fabs(x0)))
    return seg;
  throw ConstructionError("correct_to_admissible: Newton did not converge");
}

} // namespace sdde
