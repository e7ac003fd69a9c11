#include "sdde/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "sdde/errors.hpp"
#include "sdde/projection.hpp"

namespace sdde {

const char* verdict_name(Verdict v) {
  switch (v) {
  case Verdict::UNSTABLE_LINEAR: return "UNSTABLE_LINEAR";
  case Verdict::ASYMPTOTICALLY_STABLE_LINEAR:
    return "ASYMPTOTICALLY_STABLE_LINEAR";
  case Verdict::UNSTABLE_REDUCED: return "UNSTABLE_REDUCED";
  case Verdict::ASYMPTOTICALLY_STABLE_REDUCED:
    return "ASYMPTOTICALLY_STABLE_REDUCED";
  case Verdict::STABLE_REDUCED: return "STABLE_REDUCED";
  case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

StabilityVerdict classify_linear(const LinearCoeffs& lc, const Rect& window) {
  StabilityVerdict out;
  out.spectrum = find_roots(window, lc);
  if (!out.spectrum.sigma_u.empty()) {
    out.verdict = Verdict::UNSTABLE_LINEAR;
    out.branch = "linearized instability";
  } else if (out.spectrum.sigma_c.empty()) {
    out.verdict = Verdict::ASYMPTOTICALLY_STABLE_LINEAR;
    out.branch = "linearized stability";
  } else {
    out.verdict = Verdict::INCONCLUSIVE;
    out.branch = "spectral";
    out.note = "critical spectrum present; no nonlinear information";
  }
  return out;
}

StabilityVerdict classify(const Model& m, const ClassifyOptions& opts) {
  m.validate();

  Rect window = opts.window;
  window.re_max = std::max(window.re_max, m.a + 1.0);

  StabilityVerdict out;
  out.spectrum =
      find_roots(window, LinearCoeffs::exchange_rate(m.a), opts.roots);

  if (!out.spectrum.sigma_u.empty()) {
    out.verdict = Verdict::UNSTABLE_LINEAR;
    out.branch = "linearized instability";
    return out;
  }
  if (out.spectrum.sigma_c.empty()) {
    out.verdict = Verdict::ASYMPTOTICALLY_STABLE_LINEAR;
    out.branch = "linearized stability";
    return out;
  }

  out.branch = "center-manifold reduction";
  bool critical_simple = true;
  for (const auto& r : out.spectrum.sigma_c)
    if (r.multiplicity != 1) critical_simple = false;
  if (out.spectrum.sigma_c.size() != 1 || !critical_simple ||
      std::fabs(1.0 - m.a) < 1e-9) {
    out.verdict = Verdict::INCONCLUSIVE;
    out.note = "critical root not simple; center projection degenerate";
    return out;
  }

  try {
    const CenterBasis basis(m.a);
    std::vector<Trajectory> runs;
    std::string skipped;
    for (double eps : opts.probe_eps) {
      const Segment phi = make_admissible(m, eps);
      Trajectory tr = integrate(m, phi, opts.fit_T, opts.integ);
      if (tr.status == TrajectoryStatus::completed)
        runs.push_back(std::move(tr));
      else
        skipped += " probe eps=" + std::to_string(eps) + " -> " +
                   trajectory_status_name(tr.status) + ";";
    }
    if (runs.empty())
      throw FitError("classify: no probe trajectory completed;" + skipped);

    const ReducedFit fit = fit_reduced_field(runs, basis, opts.fit);
    out.reduced = fit;
    const double c = fit.c_fitted;
    const LyapunovVerdict lyap = lyapunov_check(
        [c](double z) { return -c * std::fabs(z) * z; }, fit.window.z_lo,
        fit.window.z_hi);
    out.lyapunov = lyap;
    if (!skipped.empty()) out.note = "skipped:" + skipped;

    switch (lyap) {
    case LyapunovVerdict::STRICT_STABLE:
      out.verdict = Verdict::ASYMPTOTICALLY_STABLE_REDUCED;
      break;
    case LyapunovVerdict::STRICT_UNSTABLE:
      out.verdict = Verdict::UNSTABLE_REDUCED;
      break;
    case LyapunovVerdict::INDEFINITE:
      out.verdict = Verdict::INCONCLUSIVE;
      out.note += " reduced field has no strict sign on the band";
      break;
    }
  } catch (const std::exception& e) {
    out.verdict = Verdict::INCONCLUSIVE;
    out.note = e.what();
  }
  return out;
}

Segment admissible_with_center(const Model& m, double z_target) {
  const CenterBasis basis(m.a);
  if (z_target == 0.0) return make_admissible(m, 0.0);

  auto coord = [&](double eps) {
    return center_coordinate(basis, make_admissible(m, eps));
  };

  double eps = z_target;
  for (int it = 0; it < 50; ++it) {
    const double g = coord(eps) - z_target;
    if (std::fabs(g) <= 1e-13 * std::max(1.0, std::fabs(z_target)))
      return make_admissible(m, eps);
    const double d = std::max(1e-9, 1e-7 * std::fabs(eps));
    const double slope = (coord(eps + d) - coord(eps)) / d;
    if (!std::isfinite(slope) || std::fabs(slope) < 1e-12)
      throw ConstructionError(
          "admissible_with_center: flat response of the center coordinate");
    eps -= g / slope;
    if (!std::isfinite(eps))
      throw ConstructionError("admissible_with_center: Newton diverged");
  }
  throw ConstructionError("admissible_with_center: Newton did not converge");
}

AttractionReport verify_attraction(const Model& m, const Segment& phi,
                                   double T, const IntegrateOptions& opts) {
  m.validate();
  if (!(m.a < 1.0))
    throw PreconditionError(
        "verify_attraction: needs an empty unstable spectrum (a < 1)");
  if (!(T > 0.0)) throw PreconditionError("verify_attraction: T must be > 0");
  if (phi.norm_c1() > 0.2)
    throw PreconditionError("verify_attraction: datum too large (norm > 0.2)");

  const CenterBasis basis(m.a);
  const double z0 = center_coordinate(basis, phi);
  const Segment shadow = admissible_with_center(m, z0);

  Trajectory tr1 = integrate(m, phi, T, opts);
  Trajectory tr2 = integrate(m, shadow, T, opts);
  if (tr1.status != TrajectoryStatus::completed ||
      tr2.status != TrajectoryStatus::completed)
    throw AttractionCheckError("verify_attraction: a probe run ended " +
                               std::string(trajectory_status_name(
                                   tr1.status == TrajectoryStatus::completed
                                       ? tr2.status
                                       : tr1.status)));

  const int n = 201;
  std::vector<double> ts(n), gaps(n);
  for (int i = 0; i < n; ++i) {
    const double t = T * static_cast<double>(i) / (n - 1);
    const Segment gap = segment_at(tr1, t) - segment_at(tr2, t);
    ts[static_cast<size_t>(i)] = t;
    gaps[static_cast<size_t>(i)] = gap.norm_c1();
  }

  AttractionReport rep;
  rep.T = T;

  // Fit ln(gap) ~ alpha - eta t on the late window, skipping values at the
  // measurement floor.
  std::vector<double> fx, fy;
  for (int i = 0; i < n; ++i) {
    if (ts[static_cast<size_t>(i)] < 0.25 * T) continue;
    if (gaps[static_cast<size_t>(i)] < 1e-15) continue;
    fx.push_back(ts[static_cast<size_t>(i)]);
    fy.push_back(std::log(gaps[static_cast<size_t>(i)]));
  }
  if (fx.size() < 10) {
    double late_peak = 0.0;
    for (int i = 0; i < n; ++i)
      if (ts[static_cast<size_t>(i)] >= 0.25 * T)
        late_peak = std::max(late_peak, gaps[static_cast<size_t>(i)]);
    if (late_peak < 1e-13) {
      rep.trivial = true;
      rep.rate = std::numeric_limits<double>::infinity();
      rep.r2 = 1.0;
      rep.n_points = static_cast<int>(fx.size());
      return rep;
    }
    throw AttractionCheckError(
        "verify_attraction: too few usable gap samples");
  }

  const auto nn = static_cast<double>(fx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < fx.size(); ++i) {
    sx += fx[i];
    sy += fy[i];
    sxx += fx[i] * fx[i];
    sxy += fx[i] * fy[i];
    syy += fy[i] * fy[i];
  }
  const double vxx = sxx - sx * sx / nn;
  const double vxy = sxy - sx * sy / nn;
  const double vyy = syy - sy * sy / nn;
  if (!(vxx > 0.0) || !(vyy > 0.0))
    throw AttractionCheckError("verify_attraction: degenerate fit");
  const double slope = vxy / vxx;

  rep.rate = -slope;
  rep.r2 = (vxy * vxy) / (vxx * vyy);
  rep.n_points = static_cast<int>(fx.size());
  return rep;
}

std::string verdict_report_json(const StabilityVerdict& v, double a) {
  nlohmann::ordered_json j;
  j["a"] = a;
  j["verdict"] = verdict_name(v.verdict);
  j["theorem"] = v.branch;
  auto root_list = [](const std::vector<Root>& roots) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : roots)
      arr.push_back({{"re", r.lambda.real()},
                     {"im", r.lambda.imag()},
                     {"multiplicity", r.multiplicity}});
    return arr;
  };
  j["sigma_u"] = root_list(v.spectrum.sigma_u);
  j["sigma_c"] = root_list(v.spectrum.sigma_c);
  const double rs = v.spectrum.rightmost_stable_re();
  if (std::isfinite(rs))
    j["rightmost_stable_re"] = rs;
  else
    j["rightmost_stable_re"] = nullptr;
  if (v.reduced) {
    j["reduced"] = {{"c_analytic", v.reduced->c_analytic},
                    {"c_fitted", v.reduced->c_fitted},
                    {"stderr", v.reduced->stderr_value},
                    {"n_samples", v.reduced->n_samples},
                    {"lyapunov",
                     v.lyapunov ? lyapunov_verdict_name(*v.lyapunov) : "none"}};
  } else {
    j["reduced"] = nullptr;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j.dump(2) + "\n";
}

} // namespace sdde
