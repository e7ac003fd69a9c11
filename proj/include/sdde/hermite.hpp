#pragma once

#include <cstddef>
#include <vector>

namespace sdde::hermite {

// Value of the cubic Hermite interpolant on [x0, x0+dx] at local coordinate
// s = (x - x0)/dx in [0, 1].
inline double eval_local(double s, double dx, double v0, double d0, double v1,
                         double d1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * v0 + h10 * dx * d0 + h01 * v1 + h11 * dx * d1;
}

// Derivative (w.r.t. x) of the same interpolant.
inline double eval_local_derivative(double s, double dx, double v0, double d0,
                                    double v1, double d1) {
  const double s2 = s * s;
  const double g00 = 6.0 * s2 - 6.0 * s;
  const double g10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double g01 = -6.0 * s2 + 6.0 * s;
  const double g11 = 3.0 * s2 - 2.0 * s;
  return (g00 * v0 + g01 * v1) / dx + g10 * d0 + g11 * d1;
}

// Exact integral of the interpolant over one full interval [x0, x0+dx].
inline double integral_full(double dx, double v0, double d0, double v1,
                            double d1) {
  return dx * (v0 + v1) / 2.0 + dx * dx * (d0 - d1) / 12.0;
}

// Piecewise-cubic C^1 table over a strictly increasing knot vector.  Both
// history segments and tabulated delay functions interpolate through this.
class Table {
public:
  Table() = default;
  Table(std::vector<double> xs, std::vector<double> vs, std::vector<double> ds);

  std::size_t size() const { return xs_.size(); }
  double x_front() const { return xs_.front(); }
  double x_back() const { return xs_.back(); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& values() const { return vs_; }
  const std::vector<double>& derivatives() const { return ds_; }

  // Both evaluators expect x already clamped into [x_front, x_back].
  double value(double x) const;
  double derivative(double x) const;

  bool uniform() const { return uniform_; }
  bool same_grid(const Table& other, double tol) const;

private:
  std::size_t locate(double x) const;

  std::vector<double> xs_, vs_, ds_;
  bool uniform_ = false;
  double spacing_ = 0.0;
};

} // namespace sdde::hermite
