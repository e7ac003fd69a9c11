#include "sdde/delay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sdde/errors.hpp"

namespace sdde {

DelayFunction DelayFunction::constant(double r0) {
  if (!(r0 > 0.0)) throw PreconditionError("constant delay: r0 must be > 0");
  return DelayFunction(Kind::constant, r0);
}

DelayFunction DelayFunction::rational_bump(double c) {
  if (!(c >= 0.0))
    throw PreconditionError("rational_bump delay: c must be >= 0");
  return DelayFunction(Kind::rational_bump, c);
}

DelayFunction DelayFunction::user_table(std::vector<double> s,
                                        std::vector<double> r,
                                        std::vector<double> dr) {
  if (s.empty() || std::fabs(s.front()) > 1e-12)
    throw PreconditionError("user_table delay: samples must start at s = 0");
  s.front() = 0.0;
  DelayFunction d(Kind::user_table, 0.0);
  d.table_ = hermite::Table(std::move(s), std::move(r), std::move(dr));
  return d;
}

double DelayFunction::operator()(double s) const {
  switch (kind_) {
  case Kind::constant:
    return param_;
  case Kind::rational_bump:
    return 1.0 / (1.0 + param_ * s * s);
  case Kind::user_table: {
    const double u = std::min(std::fabs(s), table_.x_back());
    return table_.value(u);
  }
  }
  return 0.0;
}

double DelayFunction::derivative(double s) const {
  switch (kind_) {
  case Kind::constant:
    return 0.0;
  case Kind::rational_bump: {
    const double q = 1.0 + param_ * s * s;
    return -2.0 * param_ * s / (q * q);
  }
  case Kind::user_table: {
    const double u = std::min(std::fabs(s), table_.x_back());
    const double d = table_.derivative(u);
    return s < 0.0 ? -d : d;
  }
  }
  return 0.0;
}

std::string DelayFunction::describe() const {
  char buf[64];
  switch (kind_) {
  case Kind::constant:
    std::snprintf(buf, sizeof buf, "constant(r0=%g)", param_);
    return buf;
  case Kind::rational_bump:
    std::snprintf(buf, sizeof buf, "rational_bump(c=%g)", param_);
    return buf;
  case Kind::user_table:
    return "user_table";
  }
  return "?";
}

DelayValidation validate_delay(const DelayFunction& r, double span,
                               int grid_points) {
  if (!(span > 0.0) || grid_points < 3)
    throw PreconditionError("validate_delay: bad scan parameters");
  DelayValidation v;

  // Finiteness of r and r' over the scan grid stands in for smoothness; the
  // analytic families are C^1 by construction and tables are C^1 by the
  // interpolation scheme.
  v.smooth.pass = true;
  v.range.pass = true;
  v.even.pass = true;
  const double r_at_0 = r(0.0);

  for (int i = 0; i < grid_points; ++i) {
    const double s =
        -span + 2.0 * span * static_cast<double>(i) /
                    static_cast<double>(grid_points - 1);
    const double rv = r(s);
    const double rd = r.derivative(s);
    if (!std::isfinite(rv) || !std::isfinite(rd)) {
      if (v.smooth.pass) {
        v.smooth.pass = false;
        v.smooth.worst_s = s;
        v.smooth.worst_value = rv;
        v.smooth.detail = "non-finite value or slope";
      }
      continue;
    }
    v.max_abs_slope = std::max(v.max_abs_slope, std::fabs(rd));
    if (rv <= 0.0 || rv > r_at_0 + 1e-12) {
      if (v.range.pass || std::fabs(rv - r_at_0) >
                              std::fabs(v.range.worst_value - r_at_0)) {
        v.range.pass = false;
        v.range.worst_s = s;
        v.range.worst_value = rv;
        v.range.detail = "value escapes (0, r(0)]";
      }
    }
    const double mismatch = std::fabs(rv - r(-s));
    if (mismatch > 1e-12 && mismatch > std::fabs(v.even.worst_value)) {
      v.even.pass = false;
      v.even.worst_s = s;
      v.even.worst_value = mismatch;
      v.even.detail = "r(s) != r(-s)";
    }
  }

  v.normalized.worst_value = r_at_0;
  v.normalized.pass = std::fabs(r_at_0 - 1.0) <= 1e-12;
  if (!v.normalized.pass) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "r(0) = %.17g", r_at_0);
    v.normalized.detail = buf;
  }
  return v;
}

} // namespace sdde
