#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdde/integrator.hpp"
#include "sdde/model.hpp"
#include "sdde/reduction.hpp"
#include "sdde/spectrum.hpp"

namespace sdde {

enum class Verdict {
  UNSTABLE_LINEAR,               // spectrum strictly to the right somewhere
  ASYMPTOTICALLY_STABLE_LINEAR,  // spectrum strictly to the left
  UNSTABLE_REDUCED,              // critical case, reduced field repelling
  ASYMPTOTICALLY_STABLE_REDUCED, // critical case, reduced field attracting
  STABLE_REDUCED,                // critical case, neutral reduced field
  INCONCLUSIVE
};

const char* verdict_name(Verdict v);

struct ClassifyOptions {
  Rect window{-5.0, 2.0, 40.0}; // re_max is raised to a + 1 when needed
  std::vector<double> probe_eps{0.05, 0.1, 0.15};
  double fit_T = 100.0;
  FitOptions fit{};
  IntegrateOptions integ{};
  FindRootsOptions roots{};
};

struct StabilityVerdict {
  Verdict verdict = Verdict::INCONCLUSIVE;
  std::string branch; // which route decided: "linearized instability",
                      // "linearized stability", "center-manifold reduction"
  SpectrumSplit spectrum;
  std::optional<ReducedFit> reduced;
  std::optional<LyapunovVerdict> lyapunov;
  std::string note; // failure detail when INCONCLUSIVE
};

// Full decision pipeline: spectrum split, then either a linearized verdict
// or the center-manifold reduction with a Lyapunov check on the fitted
// field.  Degenerate critical spectra come back INCONCLUSIVE, as do fit
// failures; numerical errors inside the reduction are reported, not thrown.
StabilityVerdict classify(const Model& m, const ClassifyOptions& opts = {});

// Spectral part only, for an arbitrary linear equation of this shape.
StabilityVerdict classify_linear(const LinearCoeffs& lc,
                                 const Rect& window = {-5.0, 2.0, 40.0});

struct AttractionReport {
  double rate = 0.0; // fitted decay exponent of the C^1 gap
  double r2 = 0.0;
  int n_points = 0;
  double T = 0.0;
  bool trivial = false; // the two runs never separated measurably
};

// Evidence for the local attraction statement: pair phi with a shadow datum
// sharing its center coordinate, integrate both, and fit the exponential
// decay rate of their C^1 distance on [T/4, T].
AttractionReport verify_attraction(const Model& m, const Segment& phi,
                                   double T = 20.0,
                                   const IntegrateOptions& opts = {});

// Admissible datum whose center coordinate equals z_target (Newton on the
// profile height).
Segment admissible_with_center(const Model& m, double z_target);

// {a, verdict, theorem, sigma_u, sigma_c, rightmost_stable_re, reduced}
std::string verdict_report_json(const StabilityVerdict& v, double a);

} // namespace sdde
