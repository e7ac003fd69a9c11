#include "sdde/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "sdde/errors.hpp"

namespace sdde::hermite {

Table::Table(std::vector<double> xs, std::vector<double> vs,
             std::vector<double> ds)
    : xs_(std::move(xs)), vs_(std::move(vs)), ds_(std::move(ds)) {
  if (xs_.size() < 2 || xs_.size() != vs_.size() || xs_.size() != ds_.size())
    throw PreconditionError("hermite::Table: need >= 2 knots and matching "
                            "value/derivative arrays");
  for (std::size_t i = 1; i < xs_.size(); ++i)
    if (!(xs_[i] > xs_[i - 1]))
      throw PreconditionError("hermite::Table: knots must strictly increase");
  for (std::size_t i = 0; i < xs_.size(); ++i)
    if (!std::isfinite(xs_[i]) || !std::isfinite(vs_[i]) ||
        !std::isfinite(ds_[i]))
      throw PreconditionError("hermite::Table: non-finite entry");

  const double dx0 = xs_[1] - xs_[0];
  uniform_ = true;
  for (std::size_t i = 1; i + 1 < xs_.size(); ++i) {
    const double dx = xs_[i + 1] - xs_[i];
    if (std::fabs(dx - dx0) > 1e-12 * std::max(1.0, std::fabs(dx0))) {
      uniform_ = false;
      break;
    }
  }
  spacing_ = dx0;
}

std::size_t Table::locate(double x) const {
  const std::size_t last = xs_.size() - 2;
  if (uniform_) {
    double fi = (x - xs_.front()) / spacing_;
    if (fi < 0.0) fi = 0.0;
    auto i = static_cast<std::size_t>(fi);
    if (i > last) i = last;
    // Guard against rounding at the knot just below x.
    if (x < xs_[i] && i > 0) --i;
    if (i < last && x >= xs_[i + 1]) ++i;
    return i;
  }
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  return std::min(i, last);
}

double Table::value(double x) const {
  const std::size_t i = locate(x);
  const double dx = xs_[i + 1] - xs_[i];
  const double s = (x - xs_[i]) / dx;
  return eval_local(s, dx, vs_[i], ds_[i], vs_[i + 1], ds_[i + 1]);
}

double Table::derivative(double x) const {
  const std::size_t i = locate(x);
  const double dx = xs_[i + 1] - xs_[i];
  const double s = (x - xs_[i]) / dx;
  return eval_local_derivative(s, dx, vs_[i], ds_[i], vs_[i + 1], ds_[i + 1]);
}

bool Table::same_grid(const Table& other, double tol) const {
  if (xs_.size() != other.xs_.size()) return false;
  for (std::size_t i = 0; i < xs_.size(); ++i)
    if (std::fabs(xs_[i] - other.xs_[i]) > tol) return false;
  return true;
}

} // namespace sdde::hermite
