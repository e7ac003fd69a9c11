#include "sdde/segment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "sdde/errors.hpp"

namespace sdde {

namespace {

std::vector<double> uniform_grid(double h, int n_nodes) {
  if (n_nodes < 2) throw PreconditionError("Segment: need at least 2 nodes");
  std::vector<double> thetas(static_cast<size_t>(n_nodes));
  const int m = n_nodes - 1;
  for (int i = 0; i <= m; ++i)
    thetas[static_cast<size_t>(i)] = -h + h * static_cast<double>(i) /
                                              static_cast<double>(m);
  thetas.back() = 0.0;
  return thetas;
}

// Maximize f over [a, b] by golden-section; f is unimodal enough piecewise
// that node+midpoint bracketing makes this reliable.
double golden_max(const std::function<double(double)>& f, double a, double b) {
  static const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    }
  }
  return std::max(fc, fd);
}

// sup of |g| over the segment grid: discrete scan over nodes and interval
// midpoints, then a local polish around the best bracket.
double sup_abs(const hermite::Table& table,
               const std::function<double(double)>& g) {
  const auto& xs = table.xs();
  std::vector<double> grid;
  grid.reserve(2 * xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    grid.push_back(xs[i]);
    if (i + 1 < xs.size()) grid.push_back(0.5 * (xs[i] + xs[i + 1]));
  }
  double best = 0.0;
  size_t best_i = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double v = std::fabs(g(grid[i]));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = grid[best_i == 0 ? 0 : best_i - 1];
  const double hi = grid[std::min(best_i + 1, grid.size() - 1)];
  if (hi > lo) {
    const double polished =
        golden_max([&](double x) { return std::fabs(g(x)); }, lo, hi);
    best = std::max(best, polished);
  }
  return best;
}

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

} // namespace

Segment::Segment(double h, std::vector<double> thetas,
                 std::vector<double> values, std::vector<double> derivatives)
    : h_(h),
      table_(std::move(thetas), std::move(values), std::move(derivatives)) {
  if (!(h > 0.0)) throw PreconditionError("Segment: h must be positive");
  const double tol = 1e-12 * std::max(1.0, h);
  if (std::fabs(table_.x_front() + h) > tol || std::fabs(table_.x_back()) > tol)
    throw PreconditionError("Segment: grid must run from -h to 0");
}

Segment Segment::zero(double h, int n_nodes) { return constant(0.0, h, n_nodes); }

Segment Segment::constant(double value, double h, int n_nodes) {
  auto thetas = uniform_grid(h, n_nodes);
  std::vector<double> vs(thetas.size(), value);
  std::vector<double> ds(thetas.size(), 0.0);
  return Segment(h, std::move(thetas), std::move(vs), std::move(ds));
}

Segment Segment::from_function(const std::function<double(double)>& value,
                               const std::function<double(double)>& derivative,
                               double h, int n_nodes) {
  auto thetas = uniform_grid(h, n_nodes);
  std::vector<double> vs(thetas.size()), ds(thetas.size());
  for (size_t i = 0; i < thetas.size(); ++i) {
    vs[i] = value(thetas[i]);
    ds[i] = derivative(thetas[i]);
  }
  return Segment(h, std::move(thetas), std::move(vs), std::move(ds));
}

double Segment::clamp_theta(double theta) const {
  const double tol = 1e-12 * std::max(1.0, h_);
  if (theta < -h_ - tol || theta > tol)
    throw DomainError("Segment: theta outside [-h, 0]");
  return std::clamp(theta, -h_, 0.0);
}

double Segment::eval(double theta) const {
  return table_.value(clamp_theta(theta));
}

double Segment::eval_derivative(double theta) const {
  return table_.derivative(clamp_theta(theta));
}

double Segment::norm_c() const {
  return sup_abs(table_, [&](double x) { return table_.value(x); });
}

double Segment::norm_c1() const {
  return norm_c() +
         sup_abs(table_, [&](double x) { return table_.derivative(x); });
}

bool Segment::same_grid(const Segment& other) const {
  return std::fabs(h_ - other.h_) <= 1e-12 * std::max(1.0, h_) &&
         table_.same_grid(other.table_, 1e-12 * std::max(1.0, h_));
}

namespace {

Segment combine(const Segment& a, const Segment& b, double cb) {
  if (!a.same_grid(b))
    throw PreconditionError("Segment arithmetic: grids do not match");
  const auto& t = a.table();
  std::vector<double> vs(t.size()), ds(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    vs[i] = t.values()[i] + cb * b.table().values()[i];
    ds[i] = t.derivatives()[i] + cb * b.table().derivatives()[i];
  }
  return Segment(a.h(), t.xs(), std::move(vs), std::move(ds));
}

} // namespace

Segment operator+(const Segment& a, const Segment& b) {
  return combine(a, b, 1.0);
}

Segment operator-(const Segment& a, const Segment& b) {
  return combine(a, b, -1.0);
}

Segment operator*(double c, const Segment& a) {
  const auto& t = a.table();
  std::vector<double> vs(t.size()), ds(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    vs[i] = c * t.values()[i];
    ds[i] = c * t.derivatives()[i];
  }
  return Segment(a.h(), t.xs(), std::move(vs), std::move(ds));
}

void write_segment_csv(std::ostream& out, const Segment& seg) {
  std::string buf = "theta,value,derivative\n";
  for (int i = 0; i < seg.node_count(); ++i) {
    append_double(buf, seg.theta(i));
    buf += ',';
    append_double(buf, seg.value(i));
    buf += ',';
    append_double(buf, seg.derivative(i));
    buf += '\n';
  }
  out << buf;
}

Segment read_segment_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw PreconditionError("segment csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "theta,value,derivative")
    throw PreconditionError("segment csv: bad header '" + line + "'");
  std::vector<double> thetas, vs, ds;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double cols[3];
    const char* p = line.c_str();
    for (int c = 0; c < 3; ++c) {
      char* end = nullptr;
      cols[c] = std::strtod(p, &end);
      if (end == p)
        throw PreconditionError("segment csv: malformed row '" + line + "'");
      p = end;
      if (c < 2) {
        if (*p != ',')
          throw PreconditionError("segment csv: malformed row '" + line + "'");
        ++p;
      }
    }
    thetas.push_back(cols[0]);
    vs.push_back(cols[1]);
    ds.push_back(cols[2]);
  }
  if (thetas.size() < 2)
    throw PreconditionError("segment csv: need at least 2 rows");
  const double h = -thetas.front();
  return Segment(h, std::move(thetas), std::move(vs), std::move(ds));
}

void write_segment_csv_file(const std::string& path, const Segment& seg) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open for write: " + path);
  write_segment_csv(f, seg);
}

Segment read_segment_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open for read: " + path);
  return read_segment_csv(f);
}

} // namespace sdde
