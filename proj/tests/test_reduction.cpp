#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "sdde/errors.hpp"
#include "sdde/model.hpp"
#include "sdde/reduction.hpp"

using sdde::CenterBasis;
using sdde::FitOptions;
using sdde::LyapunovVerdict;
using sdde::Model;
using sdde::ReducedCurve;
using sdde::ReducedFit;
using sdde::Segment;
using sdde::Trajectory;

namespace {

std::vector<Trajectory> decay_runs(double a, double T) {
  Model m;
  m.a = a;
  std::vector<Trajectory> runs;
  for (double eps : {0.05, 0.1, 0.15})
    runs.push_back(sdde::integrate(m, sdde::make_admissible(m, eps), T));
  return runs;
}

} // namespace

TEST_SUITE("reduction") {

TEST_CASE("analytic reduced field") {
  CHECK(sdde::analytic_reduced_field(0.5, 0.0) == 0.0);
  CHECK(sdde::analytic_reduced_field(0.5, 0.1) ==
        doctest::Approx(-0.02).epsilon(1e-14));
  // odd symmetry
  for (double z : {0.03, 0.7, 2.0})
    CHECK(sdde::analytic_reduced_field(0.25, -z) ==
          doctest::Approx(-sdde::analytic_reduced_field(0.25, z))
              .epsilon(1e-14));
  // unstable side: the field pushes away from 0
  CHECK(sdde::analytic_reduced_field(2.0, 0.1) > 0.0);
  CHECK_THROWS_AS(sdde::analytic_reduced_field(1.0, 0.1),
                  sdde::DegenerateProjection);
}

TEST_CASE("reduced integration against the closed form") {
  ReducedCurve zero = sdde::integrate_reduced(0.5, 0.0, 10.0);
  CHECK_FALSE(zero.blowup);
  CHECK(zero.zs.back() == 0.0);

  const ReducedCurve curve = sdde::integrate_reduced(0.5, 0.1, 100.0);
  REQUIRE_FALSE(curve.blowup);
  const double c = 2.0; // 1/(1-a)
  const double exact = oracle::reduced_closed_form(0.1, c, 100.0);
  CHECK(curve.zs.back() == doctest::Approx(exact).epsilon(1e-8));

  // t*z(t) -> 1 - a on the algebraic tail
  const ReducedCurve tail = sdde::integrate_reduced(0.5, 0.1, 500.0);
  CHECK(500.0 * tail.zs.back() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("reduced integration blows up for an unstable gain") {
  const ReducedCurve curve = sdde::integrate_reduced(2.0, 0.5, 50.0);
  CHECK(curve.blowup);
  CHECK(std::fabs(curve.zs.back()) >= 10.0);
  CHECK(curve.ts.back() < 50.0);
}

TEST_CASE("fitting the reduced field from full trajectories") {
  const CenterBasis basis(0.5);
  const auto runs = decay_runs(0.5, 100.0);
  const ReducedFit fit = sdde::fit_reduced_field(runs, basis);
  CHECK(fit.c_analytic == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.c_fitted > 1.9);
  CHECK(fit.c_fitted < 2.1);
  CHECK(fit.n_samples >= 50);
  CHECK(std::fabs(fit.c_fitted - fit.c_analytic) <= 2.0 * fit.stderr_value);
  // the band actually used respects the configured amplitude cuts
  CHECK(fit.window.z_hi <= 1.5e-2 + 1e-12);
  CHECK(fit.window.z_lo >= 5e-3 - 1e-12);
  CHECK(fit.window.t_end > fit.window.t_start);

  // reproducing the quoted coefficient for a second gain, within 5%
  const CenterBasis basisq(0.25);
  const ReducedFit fit2 =
      sdde::fit_reduced_field(decay_runs(0.25, 100.0), basisq);
  CHECK(std::fabs(fit2.c_fitted - 4.0 / 3.0) < 0.05 * (4.0 / 3.0));
  CHECK(std::fabs(fit2.c_fitted - fit2.c_analytic) <=
        2.0 * fit2.stderr_value);
}

TEST_CASE("fit stability under protocol changes") {
  const CenterBasis basis(0.5);
  const auto runs = decay_runs(0.5, 100.0);
  const ReducedFit base = sdde::fit_reduced_field(runs, basis);

  FitOptions half_stride;
  half_stride.stride = 0.05;
  const ReducedFit finer = sdde::fit_reduced_field(runs, basis, half_stride);
  CHECK(std::fabs(finer.c_fitted - base.c_fitted) <=
        2.0 * std::max(base.stderr_value, finer.stderr_value));

  // dropping one epsilon moves the estimate by less than two sigma
  std::vector<Trajectory> subset(runs.begin(), runs.begin() + 2);
  const ReducedFit sub = sdde::fit_reduced_field(subset, basis);
  CHECK(std::fabs(sub.c_fitted - base.c_fitted) <=
        2.0 * std::max(base.stderr_value, sub.stderr_value));
}

TEST_CASE("fitted trajectories decay algebraically, not exponentially") {
  const CenterBasis basis(0.5);
  Model m;
  m.a = 0.5;
  const Trajectory tr = sdde::integrate(m, sdde::make_admissible(m, 0.1),
                                        500.0);
  REQUIRE(tr.status == sdde::TrajectoryStatus::completed);
  // t * z(t) -> 1 - a
  const double z_end = sdde::center_coordinate(basis, tr, 500.0);
  CHECK(500.0 * z_end == doctest::Approx(0.5).epsilon(0.02));
  // log z / t -> 0: no exponential rate survives on the tail
  const double z_mid = sdde::center_coordinate(basis, tr, 250.0);
  CHECK(std::fabs(std::log(std::fabs(z_mid)) / 250.0) < 0.05);
}

TEST_CASE("reduced model with the fitted coefficient shadows the run") {
  const CenterBasis basis(0.5);
  const auto runs = decay_runs(0.5, 100.0);
  const ReducedFit fit = sdde::fit_reduced_field(runs, basis);

  const Trajectory& tr = runs[1]; // the eps = 0.1 run
  const double t0 = fit.window.t_start;
  const double z0 = sdde::center_coordinate(basis, tr, t0);
  for (double t = t0; t <= fit.window.t_end; t += 5.0) {
    const double z_full = sdde::center_coordinate(basis, tr, t);
    const double z_red =
        oracle::reduced_closed_form(z0, fit.c_fitted, t - t0);
    CHECK(std::fabs(z_red - z_full) < 0.05 * std::fabs(z_full));
  }
}

TEST_CASE("fit errors on unusable input") {
  const CenterBasis basis(0.5);
  Model m;
  m.a = 0.5;
  std::vector<Trajectory> zero_run{
      sdde::integrate(m, Segment::zero(), 50.0)};
  CHECK_THROWS_AS(sdde::fit_reduced_field(zero_run, basis), sdde::FitError);

  CHECK_THROWS_AS(sdde::fit_reduced_field({}, basis), sdde::PreconditionError);

  // an amplitude band nothing falls into
  FitOptions empty_band;
  empty_band.z_abs_lo = 0.90;
  empty_band.z_abs_hi = 0.99;
  const auto runs = decay_runs(0.5, 100.0);
  CHECK_THROWS_AS(sdde::fit_reduced_field(runs, basis, empty_band),
                  sdde::FitError);
}

TEST_CASE("lyapunov scan classifies sign-definite fields") {
  const auto stable = [](double z) { return -2.0 * std::fabs(z) * z; };
  CHECK(sdde::lyapunov_check(stable, 1e-4, 0.3) ==
        LyapunovVerdict::STRICT_STABLE);

  const auto unstable = [](double z) { return 2.0 * std::fabs(z) * z; };
  CHECK(sdde::lyapunov_check(unstable, 1e-4, 0.3) ==
        LyapunovVerdict::STRICT_UNSTABLE);

  // an even field pushes right on both sides: sign flips across 0
  const auto even = [](double z) { return z * z; };
  CHECK(sdde::lyapunov_check(even, 1e-4, 0.1) ==
        LyapunovVerdict::INDEFINITE);
}

TEST_CASE("fit report carries the full evidence") {
  const CenterBasis basis(0.5);
  const ReducedFit fit = sdde::fit_reduced_field(decay_runs(0.5, 100.0),
                                                 basis);
  const std::string json = sdde::fit_report_json(fit);
  for (const char* key : {"\"a\"", "\"c_analytic\"", "\"c_fitted\"",
                          "\"stderr\"", "\"n_samples\"", "\"window\"",
                          "\"residual_max\""})
    CHECK(json.find(key) != std::string::npos);
}

} // TEST_SUITE
