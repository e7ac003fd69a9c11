#pragma once

#include <string>
#include <vector>

#include "sdde/hermite.hpp"

namespace sdde {

// State-dependent delay r: R -> (0, 1], even, C^1, r(0) = 1.  Three concrete
// families: the constant delay, the rational bump 1/(1 + c*s^2), and a
// tabulated even function with C^1 interpolation.
class DelayFunction {
public:
  enum class Kind { constant, rational_bump, user_table };

  static DelayFunction constant(double r0 = 1.0);
  static DelayFunction rational_bump(double c);
  // Samples (s_i, r_i, r'_i) on s >= 0; mirrored to s < 0 by evenness.
  static DelayFunction user_table(std::vector<double> s, std::vector<double> r,
                                  std::vector<double> dr);

  double operator()(double s) const;
  double derivative(double s) const;
  double r0() const { return (*this)(0.0); }

  Kind kind() const { return kind_; }
  // Parameter for round-tripping through configs: r0 for constant, c for the
  // bump; unused for tables.
  double param() const { return param_; }
  std::string describe() const;

private:
  DelayFunction(Kind k, double p) : kind_(k), param_(p) {}

  Kind kind_;
  double param_;
  hermite::Table table_; // user_table only; domain [0, s_max]
};

struct HypothesisCheck {
  bool pass = false;
  double worst_s = 0.0;
  double worst_value = 0.0;
  std::string detail;
};

// One entry per standing hypothesis on the delay: differentiability /
// finiteness, range (0, r(0)], evenness, and normalization r(0) = 1.
struct DelayValidation {
  HypothesisCheck smooth;
  HypothesisCheck range;
  HypothesisCheck even;
  HypothesisCheck normalized;
  double max_abs_slope = 0.0;
  bool all_pass() const {
    return smooth.pass && range.pass && even.pass && normalized.pass;
  }
};

DelayValidation validate_delay(const DelayFunction& r, double span = 5.0,
                               int grid_points = 2001);

} // namespace sdde
