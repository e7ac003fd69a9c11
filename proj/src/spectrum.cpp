#include "sdde/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "sdde/errors.hpp"

namespace sdde {

std::complex<double> char_value(std::complex<double> lambda,
                                const LinearCoeffs& lc) {
  return lambda - lc.A - lc.B * std::exp(-lambda);
}

std::complex<double> char_derivative(std::complex<double> lambda,
                                     const LinearCoeffs& lc) {
  return 1.0 + lc.B * std::exp(-lambda);
}

std::complex<double> char_value(std::complex<double> lambda, double a) {
  return char_value(lambda, LinearCoeffs::exchange_rate(a));
}

std::complex<double> char_derivative(std::complex<double> lambda, double a) {
  return char_derivative(lambda, LinearCoeffs::exchange_rate(a));
}

namespace {

// (1/lambda) * Delta(lambda) for the exchange-rate family, extended
// continuously through 0 by the value 1 - a.  Strictly increasing in lambda,
// which makes it the right bisection target for the real root.
double eta(double lambda, double a) {
  if (lambda == 0.0) return 1.0 - a;
  return 1.0 - a * (1.0 - std::exp(-lambda)) / lambda;
}

} // namespace

std::optional<double> real_root_kappa(double a) {
  if (!(a > 0.0)) throw PreconditionError("real_root_kappa: a must be > 0");
  if (std::fabs(a - 1.0) <= 1e-12) return std::nullopt;

  double lo, hi;
  if (a > 1.0) {
    lo = 0.0;
    hi = std::max(50.0, 2.0 * a);
    if (!(eta(lo, a) < 0.0 && eta(hi, a) > 0.0))
      throw SearchError("real_root_kappa: bracket failed (a > 1)");
  } else {
    hi = 0.0;
    lo = -4.0;
    while (eta(lo, a) > 0.0 && lo > -700.0) lo *= 2.0;
    if (!(eta(lo, a) < 0.0 && eta(hi, a) > 0.0))
      throw SearchError("real_root_kappa: bracket failed (a < 1)");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (eta(mid, a) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, std::fabs(mid))) break;
  }

  double lambda = 0.5 * (lo + hi);
  const LinearCoeffs lc = LinearCoeffs::exchange_rate(a);
  for (int it = 0; it < 5; ++it) {
    const double f = char_value(std::complex<double>(lambda, 0.0), lc).real();
    const double df =
        char_derivative(std::complex<double>(lambda, 0.0), lc).real();
    if (std::fabs(df) < 1e-8) break;
    lambda -= f / df;
  }
  if (!std::isfinite(lambda) || lambda == 0.0)
    throw SearchError("real_root_kappa: polish produced unusable value");
  return lambda;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tracks the argument of Delta along contour pieces, subdividing until each
// increment is safely below pi/2.  `too_close` is raised when the contour
// runs into a (near-)zero of Delta, so the caller can inflate and retry.
struct EdgeWalker {
  const LinearCoeffs& lc;
  double near_zero;   // absolute floor on |Delta| along the contour
  double max_piece;   // forced sampling density in the lambda plane
  bool too_close = false;

  double walk(std::complex<double> za, std::complex<double> zb) {
    const auto wa = char_value(za, lc);
    const auto wb = char_value(zb, lc);
    check(wa);
    check(wb);
    if (too_close) return 0.0;
    return rec(za, wa, zb, wb, 0);
  }

  void check(std::complex<double> w) {
    if (std::abs(w) < near_zero) too_close = true;
  }

  double rec(std::complex<double> za, std::complex<double> wa,
             std::complex<double> zb, std::complex<double> wb, int depth) {
    if (too_close) return 0.0;
    if (depth >= 50) {
      too_close = true;
      return 0.0;
    }
    const double d = std::arg(wb / wa);
    if (std::abs(zb - za) <= max_piece && std::fabs(d) < 1.2) return d;
    const auto zm = 0.5 * (za + zb);
    const auto wm = char_value(zm, lc);
    check(wm);
    if (too_close) return 0.0;
    return rec(za, wa, zm, wm, depth + 1) + rec(zm, wm, zb, wb, depth + 1);
  }
};

bool rect_winding(const Rect& r, const LinearCoeffs& lc, double near_zero,
                  int* count_out) {
  EdgeWalker w{lc, near_zero, 0.125};
  const std::complex<double> c1(r.re_min, -r.im_max);
  const std::complex<double> c2(r.re_max, -r.im_max);
  const std::complex<double> c3(r.re_max, r.im_max);
  const std::complex<double> c4(r.re_min, r.im_max);
  const double total =
      w.walk(c1, c2) + w.walk(c2, c3) + w.walk(c3, c4) + w.walk(c4, c1);
  if (w.too_close) return false;
  const double turns = total / kTwoPi;
  const double rounded = std::round(turns);
  if (std::fabs(turns - rounded) > 0.25 || rounded < 0.0) return false;
  *count_out = static_cast<int>(rounded);
  return true;
}

int count_roots_certified(const Rect& window, const LinearCoeffs& lc,
                          Rect* used) {
  if (!(window.re_min < window.re_max) || !(window.im_max > 0.0))
    throw PreconditionError("count_roots: degenerate window");
  for (int attempt = 0; attempt < 6; ++attempt) {
    const double g = 1e-3 * attempt;
    const Rect r{window.re_min - g, window.re_max + g, window.im_max + g};
    int n = 0;
    if (rect_winding(r, lc, 1e-8, &n)) {
      if (used) *used = r;
      return n;
    }
  }
  throw ContourError(
      "count_roots: contour passes too close to a root even after inflation");
}

// Winding of Delta around a circle; used for multiplicities, where |Delta|
// is legitimately tiny, so the near-zero escape is essentially "exact zero".
bool circle_winding(std::complex<double> center, double radius,
                    const LinearCoeffs& lc, int* turns_out) {
  EdgeWalker w{lc, 1e-300, std::numeric_limits<double>::infinity()};
  double total = 0.0;
  const int arcs = 16;
  for (int k = 0; k < arcs && !w.too_close; ++k) {
    const double t0 = kTwoPi * k / arcs;
    const double t1 = kTwoPi * (k + 1) / arcs;
    const auto za = center + radius * std::polar(1.0, t0);
    const auto zb = center + radius * std::polar(1.0, t1);
    total += w.walk(za, zb);
  }
  if (w.too_close) return false;
  const double turns = total / kTwoPi;
  const double rounded = std::round(turns);
  if (std::fabs(turns - rounded) > 0.25 || rounded < 1.0) return false;
  *turns_out = static_cast<int>(rounded);
  return true;
}

bool newton_root(std::complex<double>& lam, const LinearCoeffs& lc,
                 int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const auto f = char_value(lam, lc);
    if (std::abs(f) < 1e-13 * std::max(1.0, std::abs(lam))) return true;
    const auto df = char_derivative(lam, lc);
    if (std::abs(df) < 1e-14) {
      lam += std::complex<double>(1e-6, 1e-6);
      continue;
    }
    lam -= f / df;
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag()) ||
        std::abs(lam) > 1e6)
      return false;
  }
  return std::abs(char_value(lam, lc)) < 1e-13 * std::max(1.0, std::abs(lam));
}

bool inside(std::complex<double> z, const Rect& r, double pad) {
  return z.real() >= r.re_min - pad && z.real() <= r.re_max + pad &&
         std::fabs(z.imag()) <= r.im_max + pad;
}

bool root_order(const Root& x, const Root& y) {
  if (x.lambda.real() != y.lambda.real())
    return x.lambda.real() > y.lambda.real();
  return x.lambda.imag() < y.lambda.imag();
}

} // namespace

int count_roots(const Rect& window, const LinearCoeffs& lc) {
  return count_roots_certified(window, lc, nullptr);
}

int count_roots(const Rect& window, double a) {
  return count_roots(window, LinearCoeffs::exchange_rate(a));
}

double SpectrumSplit::rightmost_stable_re() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : sigma_s) best = std::max(best, r.lambda.real());
  return best;
}

std::vector<const Root*> SpectrumSplit::all() const {
  std::vector<const Root*> out;
  for (const auto& r : sigma_u) out.push_back(&r);
  for (const auto& r : sigma_c) out.push_back(&r);
  for (const auto& r : sigma_s) out.push_back(&r);
  return out;
}

SpectrumSplit find_roots(const Rect& window, const LinearCoeffs& lc,
                         const FindRootsOptions& opts) {
  if (!(window.re_min < 0.0 && window.re_max > 0.0))
    throw PreconditionError("find_roots: window must straddle Re = 0");

  Rect used{};
  const int counted = count_roots_certified(window, lc, &used);

  // Newton from a uniform seed grid over the certified rectangle.
  std::vector<std::complex<double>> hits;
  const double sp = opts.seed_spacing;
  const int n_re =
      static_cast<int>(std::floor((used.re_max - used.re_min) / sp)) + 1;
  const int n_im = static_cast<int>(std::floor(2.0 * used.im_max / sp)) + 1;
  for (int i = 0; i < n_re; ++i) {
    for (int j = 0; j < n_im; ++j) {
      std::complex<double> lam(used.re_min + sp * i, -used.im_max + sp * j);
      if (newton_root(lam, lc, opts.max_newton_iterations) &&
          inside(lam, used, 1e-9))
        hits.push_back(lam);
    }
  }

  // Dedupe, keeping the representative with the smallest residual.
  std::vector<std::complex<double>> uniq;
  for (const auto& z : hits) {
    bool merged = false;
    for (auto& u : uniq) {
      if (std::abs(z - u) < opts.dedupe_distance) {
        if (std::abs(char_value(z, lc)) < std::abs(char_value(u, lc))) u = z;
        merged = true;
        break;
      }
    }
    if (!merged) uniq.push_back(z);
  }

  // Winding-number multiplicity on a small circle around each root.  The
  // radius shrinks when another root is nearby so each circle isolates one.
  std::vector<Root> roots;
  for (size_t i = 0; i < uniq.size(); ++i) {
    double radius = opts.multiplicity_radius;
    for (size_t j = 0; j < uniq.size(); ++j)
      if (j != i)
        radius = std::min(radius, 0.45 * std::abs(uniq[i] - uniq[j]));

    int mult = 0;
    bool ok = false;
    for (double f : {1.0, 0.5, 2.0, 0.25, 4.0}) {
      if (circle_winding(uniq[i], radius * f, lc, &mult)) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw ContourError("find_roots: multiplicity winding failed near root");

    std::complex<double> lam = uniq[i];
    if (mult > 1) {
      // Plain Newton stalls at multiple roots; the m-scaled step restores
      // quadratic convergence there.
      auto best = lam;
      for (int it = 0; it < 40; ++it) {
        const auto fv = char_value(lam, lc);
        const auto dfv = char_derivative(lam, lc);
        if (std::abs(fv) < 1e-300 || std::abs(dfv) < 1e-300) break;
        const auto step = static_cast<double>(mult) * fv / dfv;
        lam -= step;
        if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) {
          lam = best;
          break;
        }
        if (std::abs(char_value(lam, lc)) < std::abs(char_value(best, lc)))
          best = lam;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(lam))) break;
      }
      lam = best;
    }

    Root r;
    r.lambda = lam;
    r.multiplicity = mult;
    if (lam.real() > opts.center_tol)
      r.klass = RootClass::unstable;
    else if (lam.real() >= -opts.center_tol)
      r.klass = RootClass::center;
    else
      r.klass = RootClass::stable;
    roots.push_back(r);
  }

  int found = 0;
  for (const auto& r : roots) found += r.multiplicity;
  if (found != counted) throw IncompleteSearchError(found, counted);

  for (const auto& r : roots) {
    const double res = std::abs(char_value(r.lambda, lc));
    if (res > 1e-10 * std::max(1.0, std::abs(r.lambda)))
      throw SearchError("find_roots: root residual above certificate bound");
  }

  SpectrumSplit split;
  split.window = used;
  split.counted = counted;
  split.found = found;
  split.center_tol = opts.center_tol;
  for (const auto& r : roots) {
    switch (r.klass) {
    case RootClass::unstable: split.sigma_u.push_back(r); break;
    case RootClass::center: split.sigma_c.push_back(r); break;
    case RootClass::stable: split.sigma_s.push_back(r); break;
    }
  }
  std::sort(split.sigma_u.begin(), split.sigma_u.end(), root_order);
  std::sort(split.sigma_c.begin(), split.sigma_c.end(), root_order);
  std::sort(split.sigma_s.begin(), split.sigma_s.end(), root_order);
  return split;
}

SpectrumSplit find_roots(const Rect& window, double a,
                         const FindRootsOptions& opts) {
  return find_roots(window, LinearCoeffs::exchange_rate(a), opts);
}

const char* root_class_name(RootClass k) {
  switch (k) {
  case RootClass::unstable: return "unstable";
  case RootClass::center: return "center";
  case RootClass::stable: return "stable";
  }
  return "?";
}

void write_roots_csv(std::ostream& out, const SpectrumSplit& split) {
  std::string buf = "re,im,multiplicity,class\n";
  char num[40];
  for (const Root* r : split.all()) {
    std::snprintf(num, sizeof num, "%.17g", r->lambda.real());
    buf += num;
    buf += ',';
    std::snprintf(num, sizeof num, "%.17g", r->lambda.imag());
    buf += num;
    std::snprintf(num, sizeof num, ",%d,", r->multiplicity);
    buf += num;
    buf += root_class_name(r->klass);
    buf += '\n';
  }
  out << buf;
}

void write_roots_csv_file(const std::string& path, const SpectrumSplit& split) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open for write: " + path);
  write_roots_csv(f, split);
}

} // namespace sdde
