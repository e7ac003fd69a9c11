#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "sdde/hermite.hpp"

namespace sdde {

// A C^1 history segment: a function on [-h, 0] stored as node values plus
// node derivatives on a grid, with cubic Hermite interpolation in between.
// Immutable after construction; arithmetic returns new segments.
class Segment {
public:
  // Number of uniform grid intervals used by the factories below.  257 nodes
  // => spacing 1/256, exactly representable for h = 1.
  static constexpr int kDefaultIntervals = 256;

  Segment(double h, std::vector<double> thetas, std::vector<double> values,
          std::vector<double> derivatives);

  static Segment zero(double h = 1.0, int n_nodes = kDefaultIntervals + 1);
  static Segment constant(double value, double h = 1.0,
                          int n_nodes = kDefaultIntervals + 1);
  static Segment from_function(const std::function<double(double)>& value,
                               const std::function<double(double)>& derivative,
                               double h = 1.0,
                               int n_nodes = kDefaultIntervals + 1);

  double h() const { return h_; }
  int node_count() const { return static_cast<int>(table_.size()); }
  double theta(int i) const { return table_.xs()[static_cast<size_t>(i)]; }
  double value(int i) const { return table_.values()[static_cast<size_t>(i)]; }
  double derivative(int i) const {
    return table_.derivatives()[static_cast<size_t>(i)];
  }

  // Evaluation clamps theta within 1e-12 * max(1, h) of the endpoints and
  // throws DomainError beyond that.
  double eval(double theta) const;
  double eval_derivative(double theta) const;

  // sup |phi| and sup |phi| + sup |phi'| over [-h, 0].
  double norm_c() const;
  double norm_c1() const;

  const hermite::Table& table() const { return table_; }
  bool same_grid(const Segment& other) const;

private:
  double clamp_theta(double theta) const;

  double h_;
  hermite::Table table_;
};

// Node-wise linear algebra; operands must share h and grid.
Segment operator+(const Segment& a, const Segment& b);
Segment operator-(const Segment& a, const Segment& b);
Segment operator*(double c, const Segment& a);

// CSV with header "theta,value,derivative", one row per node, full double
// precision.  Reading checks ordering and endpoint placement.
void write_segment_csv(std::ostream& out, const Segment& seg);
Segment read_segment_csv(std::istream& in);
void write_segment_csv_file(const std::string& path, const Segment& seg);
Segment read_segment_csv_file(const std::string& path);

} // namespace sdde
