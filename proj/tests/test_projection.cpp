#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "sdde/errors.hpp"
#include "sdde/integrator.hpp"
#include "sdde/projection.hpp"

using sdde::CenterBasis;
using sdde::Segment;

TEST_SUITE("projection") {

TEST_CASE("center coordinate of distinguished segments") {
  const CenterBasis basis(0.5);
  // the basis function itself has coordinate 1
  CHECK(sdde::center_coordinate(basis, basis.basis_segment()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sdde::center_coordinate(basis, Segment::zero()) == 0.0);
  CHECK(sdde::center_coordinate(basis, Segment::constant(-0.3)) ==
        doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("decaying eigenmodes are annihilated") {
  for (double a : {0.5, 2.0}) {
    const CenterBasis basis(a);
    const double k = a == 0.5 ? oracle::kKappaHalf : oracle::kKappa2;
    const Segment mode = Segment::from_function(
        [=](double th) { return std::exp(k * th); },
        [=](double th) { return k * std::exp(k * th); });
    CHECK(std::fabs(sdde::center_coordinate(basis, mode)) < 1e-10);
  }
}

TEST_CASE("the fold gain has no center projection") {
  CHECK_THROWS_AS(CenterBasis(1.0), sdde::DegenerateProjection);
  CHECK_THROWS_AS(CenterBasis(1.0 + 1e-12), sdde::DegenerateProjection);
}

TEST_CASE("segment quadrature matches an independent rule") {
  const CenterBasis basis(0.7);
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Segment phi = oracle::random_segment(rng);
    const double integral = oracle::simpson([&](double th) {
      return phi.eval(th);
    }, -1.0, 0.0);
    const double expected = (phi.eval(0.0) - 0.7 * integral) / (1.0 - 0.7);
    CHECK(sdde::center_coordinate(basis, phi) ==
          doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("projection is idempotent and constant-preserving") {
  const CenterBasis basis(0.5);
  const Segment c = Segment::constant(0.42);
  const Segment pc = sdde::project_center(basis, c);
  CHECK((pc - c).norm_c1() < 1e-12);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Segment phi = oracle::random_segment(rng);
    const Segment once = sdde::project_center(basis, phi);
    const Segment twice = sdde::project_center(basis, once);
    CHECK((twice - once).norm_c1() < 1e-11 * std::max(1.0, once.norm_c1()));
  }
}

TEST_CASE("projection kills the decaying real mode") {
  const CenterBasis basis(0.5);
  const double k = oracle::kKappaHalf;
  const Segment mode = Segment::from_function(
      [=](double th) { return std::exp(k * th); },
      [=](double th) { return k * std::exp(k * th); });
  CHECK(sdde::project_center(basis, mode).norm_c1() < 1e-10);
}

TEST_CASE("lift then read back") {
  for (double a : {0.25, 0.5, 2.0}) {
    const CenterBasis basis(a);
    for (double z : {-0.3, 0.02, 5.0}) {
      const Segment lifted = sdde::lift_center(basis, z);
      CHECK(sdde::center_coordinate(basis, lifted) ==
            doctest::Approx(z).epsilon(1e-12));
      CHECK(lifted.eval(-0.4) == doctest::Approx(z).epsilon(1e-12));
      CHECK(std::fabs(lifted.eval_derivative(-0.4)) < 1e-14);
    }
  }
}

TEST_CASE("center coordinate is a conserved quantity of the linear flow") {
  const CenterBasis basis(0.5);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Segment psi = oracle::random_segment(rng);
    const auto tr = sdde::integrate_linear(0.5, psi, 5.0);
    REQUIRE(tr.status == sdde::TrajectoryStatus::completed);
    const double z0 = sdde::center_coordinate(basis, tr, 0.0);
    for (double t : {0.5, 1.0, 2.5, 5.0}) {
      const double zt = sdde::center_coordinate(basis, tr, t);
      CHECK(std::fabs(zt - z0) < 1e-6 * std::max(1.0, std::fabs(z0)));
    }
  }
}

TEST_CASE("segment and trajectory quadrature paths agree") {
  const CenterBasis basis(2.0);
  std::mt19937_64 rng(5);
  const Segment psi = oracle::random_segment(rng);
  const auto tr = sdde::integrate_linear(2.0, psi, 3.0);
  for (double t : {0.0, 1.7, 3.0}) {
    const double via_traj = sdde::center_coordinate(basis, tr, t);
    const double via_seg =
        sdde::center_coordinate(basis, sdde::segment_at(tr, t));
    CHECK(via_traj == doctest::Approx(via_seg).epsilon(1e-9));
  }
}

} // TEST_SUITE
