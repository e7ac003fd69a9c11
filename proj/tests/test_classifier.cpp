#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "sdde/classifier.hpp"
#include "sdde/delay.hpp"
#include "sdde/errors.hpp"
#include "sdde/integrator.hpp"
#include "sdde/model.hpp"
#include "sdde/projection.hpp"
#include "sdde/reduction.hpp"
#include "sdde/spectrum.hpp"

using sdde::AttractionReport;
using sdde::ClassifyOptions;
using sdde::LinearCoeffs;
using sdde::Model;
using sdde::Segment;
using sdde::StabilityVerdict;
using sdde::Trajectory;
using sdde::TrajectoryStatus;
using sdde::Verdict;

namespace {

Model bump_model(double a) {
  Model m;
  m.a = a;
  m.delay = sdde::DelayFunction::rational_bump(1.0);
  return m;
}

// Unique real root of lambda - A - B e^{-lambda} on a sign-changing bracket.
double real_root_bisect(double A, double B, double lo, double hi) {
  auto f = [=](double x) { return x - A - B * std::exp(-x); };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(lo) <= 0.0) == (f(mid) <= 0.0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_SUITE("classifier") {

TEST_CASE("verdict names are canonical") {
  CHECK(std::string(sdde::verdict_name(Verdict::UNSTABLE_LINEAR)) ==
        "UNSTABLE_LINEAR");
  CHECK(std::string(sdde::verdict_name(
            Verdict::ASYMPTOTICALLY_STABLE_LINEAR)) ==
        "ASYMPTOTICALLY_STABLE_LINEAR");
  CHECK(std::string(sdde::verdict_name(Verdict::UNSTABLE_REDUCED)) ==
        "UNSTABLE_REDUCED");
  CHECK(std::string(sdde::verdict_name(
            Verdict::ASYMPTOTICALLY_STABLE_REDUCED)) ==
        "ASYMPTOTICALLY_STABLE_REDUCED");
  CHECK(std::string(sdde::verdict_name(Verdict::STABLE_REDUCED)) ==
        "STABLE_REDUCED");
  CHECK(std::string(sdde::verdict_name(Verdict::INCONCLUSIVE)) ==
        "INCONCLUSIVE");
}

TEST_CASE("a = 2 is rejected by the linearization alone") {
  const StabilityVerdict v = sdde::classify(bump_model(2.0));
  CHECK(v.verdict == Verdict::UNSTABLE_LINEAR);
  CHECK(v.branch == "linearized instability");
  REQUIRE(v.spectrum.sigma_u.size() == 1);
  CHECK(v.spectrum.sigma_u[0].lambda.real() ==
        doctest::Approx(oracle::kKappa2).epsilon(1e-9));
  CHECK(std::fabs(v.spectrum.sigma_u[0].lambda.imag()) < 1e-9);
  CHECK(v.spectrum.sigma_u[0].multiplicity == 1);
  CHECK_FALSE(v.reduced.has_value());
  CHECK(v.note.empty());
}

TEST_CASE("a = 0.5 with the rational bump goes through the reduction") {
  const StabilityVerdict v = sdde::classify(bump_model(0.5));
  CHECK(v.verdict == Verdict::ASYMPTOTICALLY_STABLE_REDUCED);
  CHECK(v.branch == "center-manifold reduction");
  CHECK(v.spectrum.sigma_u.empty());
  REQUIRE(v.spectrum.sigma_c.size() == 1);
  CHECK(v.spectrum.sigma_c[0].multiplicity == 1);
  CHECK(std::abs(v.spectrum.sigma_c[0].lambda) < 1e-9);
  CHECK(v.spectrum.rightmost_stable_re() ==
        doctest::Approx(oracle::kKappaHalf).epsilon(1e-6));

  REQUIRE(v.reduced.has_value());
  CHECK(v.reduced->c_analytic == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v.reduced->c_fitted == doctest::Approx(2.0).epsilon(0.05));
  REQUIRE(v.lyapunov.has_value());
  CHECK(*v.lyapunov == sdde::LyapunovVerdict::STRICT_STABLE);

  const auto j = nlohmann::json::parse(sdde::verdict_report_json(v, 0.5));
  CHECK(j["verdict"] == "ASYMPTOTICALLY_STABLE_REDUCED");
  CHECK(j["theorem"] == "center-manifold reduction");
  CHECK(j["reduced"]["c_fitted"].get<double>() ==
        doctest::Approx(v.reduced->c_fitted));
  CHECK(j["reduced"]["lyapunov"] == "STRICT_STABLE");
}

TEST_CASE("the critical parameter a = 1 comes back inconclusive") {
  const StabilityVerdict v = sdde::classify(bump_model(1.0));
  CHECK(v.verdict == Verdict::INCONCLUSIVE);
  CHECK(v.spectrum.sigma_u.empty());
  REQUIRE(v.spectrum.sigma_c.size() == 1);
  CHECK(v.spectrum.sigma_c[0].multiplicity == 2);
  CHECK(v.note.find("not simple") != std::string::npos);
  CHECK_FALSE(v.reduced.has_value());
}

TEST_CASE("probes that never reach the fit band leave the verdict open") {
  ClassifyOptions opts;
  opts.probe_eps = {1e-6};
  opts.fit_T = 20.0;
  const StabilityVerdict v = sdde::classify(bump_model(0.5), opts);
  CHECK(v.verdict == Verdict::INCONCLUSIVE);
  CHECK(v.branch == "center-manifold reduction");
  CHECK_FALSE(v.reduced.has_value());
  CHECK_FALSE(v.note.empty());
}

TEST_CASE("a strictly stable generic equation gets a spectral certificate") {
  const LinearCoeffs lc{-1.0, 0.25};
  const StabilityVerdict v = sdde::classify_linear(lc);
  CHECK(v.verdict == Verdict::ASYMPTOTICALLY_STABLE_LINEAR);
  CHECK(v.branch == "linearized stability");
  CHECK(v.spectrum.sigma_u.empty());
  CHECK(v.spectrum.sigma_c.empty());

  const double root = real_root_bisect(lc.A, lc.B, -1.0, 0.0);
  CHECK(v.spectrum.rightmost_stable_re() ==
        doctest::Approx(root).epsilon(1e-9));
}

TEST_CASE("critical generic spectra are reported, not decided") {
  // A = 0, B = 0: the only root of lambda = 0 sits on the axis
  const StabilityVerdict v = sdde::classify_linear(LinearCoeffs{0.0, 0.0});
  CHECK(v.verdict == Verdict::INCONCLUSIVE);
  CHECK(v.branch == "spectral");
  CHECK_FALSE(v.note.empty());
}

TEST_CASE("linear stability certificate matches exponential simulation") {
  const LinearCoeffs lc{-1.0, 0.25};
  const double root = real_root_bisect(lc.A, lc.B, -1.0, 0.0);
  const Trajectory tr =
      sdde::integrate_linear(lc, Segment::constant(1.0), 20.0);
  REQUIRE(tr.status == TrajectoryStatus::completed);

  std::vector<double> ts, lnx;
  for (double t = 2.0; t <= 20.0 + 1e-9; t += 0.1) {
    const double x = tr.value(t);
    REQUIRE(x > 0.0);
    ts.push_back(t);
    lnx.push_back(std::log(x));
  }
  const oracle::LineFit f = oracle::line_fit(ts, lnx);
  CHECK(f.r2 > 0.99);
  CHECK(f.slope == doctest::Approx(root).epsilon(0.05));
}

TEST_CASE("the stable branch decays algebraically, not exponentially") {
  const Model m = bump_model(0.5);
  const Trajectory tr =
      sdde::integrate(m, sdde::make_admissible(m, 0.1), 200.0);
  REQUIRE(tr.status == TrajectoryStatus::completed);

  double acc = 0.0;
  std::vector<double> ts, lnx;
  for (double t = 100.0; t <= 200.0 + 1e-9; t += 0.5) {
    const double x = tr.value(t);
    REQUIRE(x > 0.0);
    acc += std::fabs(t * x - 0.5);
    ts.push_back(t);
    lnx.push_back(std::log(x));
  }
  CHECK(acc / static_cast<double>(ts.size()) < 0.05);

  // the local exponential rate keeps drifting toward zero on a 1/t tail
  std::vector<double> t1, y1, t2, y2;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] <= 140.0) {
      t1.push_back(ts[i]);
      y1.push_back(lnx[i]);
    }
    if (ts[i] >= 160.0) {
      t2.push_back(ts[i]);
      y2.push_back(lnx[i]);
    }
  }
  const oracle::LineFit early = oracle::line_fit(t1, y1);
  const oracle::LineFit late = oracle::line_fit(t2, y2);
  CHECK(early.slope / late.slope > 1.3);

  // the strictly stable law K e^{kappa t} cannot explain the tail at all
  const double w = -oracle::kKappaHalf;
  double mk = 0.0, my = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    mk += lnx[i] + w * ts[i];
    my += lnx[i];
  }
  mk /= static_cast<double>(ts.size());
  my /= static_cast<double>(ts.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double r = lnx[i] - (mk - w * ts[i]);
    ss_res += r * r;
    ss_tot += (lnx[i] - my) * (lnx[i] - my);
  }
  CHECK(1.0 - ss_res / ss_tot < 0.0);
}

TEST_CASE("the unstable branch escapes at the predicted exponential rate") {
  const Model m = bump_model(2.0);
  const Segment phi = sdde::make_admissible(m, 1e-4);
  sdde::IntegrateOptions io;
  io.blowup_bound = 0.01;
  const Trajectory tr = sdde::integrate(m, phi, 40.0, io);
  CHECK(tr.status == TrajectoryStatus::blowup_stopped);
  CHECK(tr.end_time() < 20.0);

  std::vector<double> ts, lnx;
  for (double t = 0.5; t <= tr.end_time(); t += 0.05) {
    const double x = std::fabs(tr.value(t));
    if (x < 1e-4 || x > 1e-2) continue;
    ts.push_back(t);
    lnx.push_back(std::log(x));
  }
  REQUIRE(ts.size() >= 20);
  const oracle::LineFit f = oracle::line_fit(ts, lnx);
  CHECK(f.slope == doctest::Approx(oracle::kKappa2).epsilon(0.10));
  CHECK(f.r2 > 0.99);
}

TEST_CASE("admissible data can be dialed to a center coordinate") {
  const Model m = bump_model(0.5);
  const sdde::CenterBasis basis(m.a);
  for (double z : {0.05, 0.02, -0.01}) {
    const Segment seg = sdde::admissible_with_center(m, z);
    CHECK(sdde::center_coordinate(basis, seg) ==
          doctest::Approx(z).epsilon(1e-9));
    CHECK(std::fabs(seg.eval_derivative(0.0) - sdde::rhs_f(m, seg)) < 1e-10);
  }
  CHECK(sdde::admissible_with_center(m, 0.0).norm_c1() == 0.0);
}

TEST_CASE("shadow-pair decay happens at the stable spectral rate") {
  const Model m = bump_model(0.5);
  const Segment base = sdde::make_admissible(m, 0.1);
  const double k = oracle::kKappaHalf;
  const Segment shape = Segment::from_function(
      [=](double th) { return std::exp(k * th); },
      [=](double th) { return k * std::exp(k * th); }, m.h, m.grid_nodes);
  const Segment phi =
      sdde::correct_to_admissible(m, base + (0.05 / shape.norm_c1()) * shape);

  const AttractionReport rep = sdde::verify_attraction(m, phi, 3.0);
  CHECK_FALSE(rep.trivial);
  CHECK(rep.rate == doctest::Approx(-oracle::kKappaHalf).epsilon(0.25));
  CHECK(rep.r2 > 0.95);
  CHECK(rep.n_points >= 100);
  CHECK(rep.T == 3.0);
}

TEST_CASE("a datum equal to its own shadow is reported as trivial") {
  const Model m = bump_model(0.5);
  const AttractionReport rep =
      sdde::verify_attraction(m, sdde::make_admissible(m, 0.0), 3.0);
  CHECK(rep.trivial);
  CHECK(std::isinf(rep.rate));
  CHECK(rep.r2 == 1.0);
}

TEST_CASE("attraction checks guard their preconditions") {
  const Model stable = bump_model(0.5);
  CHECK_THROWS_AS(sdde::verify_attraction(bump_model(2.0),
                                          sdde::make_admissible(
                                              bump_model(2.0), 0.01)),
                  sdde::PreconditionError);
  CHECK_THROWS_AS(sdde::verify_attraction(stable,
                                          sdde::make_admissible(stable, 0.5)),
                  sdde::PreconditionError);
  CHECK_THROWS_AS(sdde::verify_attraction(stable,
                                          sdde::make_admissible(stable, 0.1),
                                          -1.0),
                  sdde::PreconditionError);
}

TEST_CASE("verdict reports carry the decision evidence") {
  const StabilityVerdict v = sdde::classify(bump_model(2.0));
  const auto j = nlohmann::json::parse(sdde::verdict_report_json(v, 2.0));
  CHECK(j["a"].get<double>() == 2.0);
  CHECK(j["verdict"] == "UNSTABLE_LINEAR");
  CHECK(j["theorem"] == "linearized instability");
  REQUIRE(j["sigma_u"].size() == 1);
  CHECK(j["sigma_u"][0]["re"].get<double>() ==
        doctest::Approx(oracle::kKappa2).epsilon(1e-9));
  CHECK(j["sigma_u"][0]["multiplicity"] == 1);
  CHECK(j["sigma_c"].size() == 1);
  CHECK(j["rightmost_stable_re"].get<double>() < 0.0);
  CHECK(j["reduced"].is_null());
  CHECK_FALSE(j.contains("note"));
}

} // TEST_SUITE("classifier")
