#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sdde {

// Coefficients of the linear delay equation v'(t) = A v(t) + B v(t-1); the
// exchange-rate linearization at 0 is A = a, B = -a.
struct LinearCoeffs {
  double A;
  double B;
  static LinearCoeffs exchange_rate(double a) { return {a, -a}; }
};

std::complex<double> char_value(std::complex<double> lambda,
                                const LinearCoeffs& lc);
std::complex<double> char_derivative(std::complex<double> lambda,
                                     const LinearCoeffs& lc);
// Convenience overloads for the exchange-rate family.
std::complex<double> char_value(std::complex<double> lambda, double a);
std::complex<double> char_derivative(std::complex<double> lambda, double a);

// The unique nonzero real root of the exchange-rate characteristic function;
// empty at a = 1 where it merges with the root at 0.
std::optional<double> real_root_kappa(double a);

// Search window, symmetric about the real axis: Re in [re_min, re_max],
// |Im| <= im_max.
struct Rect {
  double re_min;
  double re_max;
  double im_max;
};

// Argument-principle count of roots (with multiplicity) strictly inside the
// rectangle.  The rectangle is inflated slightly and retried when a root sits
// on or near the contour.
int count_roots(const Rect& window, const LinearCoeffs& lc);
int count_roots(const Rect& window, double a);

enum class RootClass { unstable, center, stable };

struct Root {
  std::complex<double> lambda;
  int multiplicity = 1;
  RootClass klass = RootClass::stable;
};

struct SpectrumSplit {
  std::vector<Root> sigma_u; // Re > center_tol
  std::vector<Root> sigma_c; // |Re| <= center_tol
  std::vector<Root> sigma_s; // Re < -center_tol
  Rect window{};             // window actually certified (after inflation)
  int counted = 0;           // argument-principle count in `window`
  int found = 0;             // located roots, with multiplicity
  double center_tol = 0.0;
  double rightmost_stable_re() const;
  std::vector<const Root*> all() const;
};

struct FindRootsOptions {
  double seed_spacing = 0.5;
  double dedupe_distance = 1e-6;
  double center_tol = 1e-9;
  double multiplicity_radius = 1e-4;
  int max_newton_iterations = 60;
};

// Locate every root in the window: Newton from a seed grid, dedupe, winding-
// number multiplicities, and a completeness certificate against count_roots
// (IncompleteSearchError when the tally disagrees).
SpectrumSplit find_roots(const Rect& window, const LinearCoeffs& lc,
                         const FindRootsOptions& opts = {});
SpectrumSplit find_roots(const Rect& window, double a,
                         const FindRootsOptions& opts = {});

const char* root_class_name(RootClass k);

// CSV with header "re,im,multiplicity,class", unstable block first, then
// center, then stable; each block sorted by descending Re, ascending Im.
void write_roots_csv(std::ostream& out, const SpectrumSplit& split);
void write_roots_csv_file(const std::string& path, const SpectrumSplit& split);

} // namespace sdde
