#include <doctest.h>

#include <cmath>
#include <vector>

#include "repp/errors.hpp"
#include "repp/geometry.hpp"

using namespace repp;

namespace {

PeriodicPoint pp_at(const MapSystem& s, std::vector<int> it) { return find_periodic_point(s, it); }

bool throws_code(ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("balls for a threshold") {
  const auto q = MapSystem::quadratic(2.0);
  const auto obs = Observable::aperiodic(Point(0.5));
  const Region r = ball_for_threshold(q, obs, std::log(10.0));
  REQUIRE(r.x.size() == 1);
  CHECK(r.x[0].lo == doctest::Approx(0.4));
  CHECK(r.x[0].hi == doctest::Approx(0.6));

  const auto dbl = MapSystem::linear_mod_m(2);
  const auto o0 = Observable::periodic(pp_at(dbl, {0}));
  const Region c = ball_for_threshold(dbl, o0, std::log(10.0));
  CHECK(c.contains(0.0));
  CHECK(c.contains(0.0999));
  CHECK_FALSE(c.contains(0.1));
  CHECK(c.contains(0.95));
  CHECK_FALSE(c.contains(0.9));
  CHECK_FALSE(c.contains(0.5));

  Observable b = Observable::aperiodic(Point(0.5), Shape::Bounded);
  b.D = 1.0;
  b.s = 1.0;
  CHECK(b.radius_for_level(0.9) == doctest::Approx(0.1));
  CHECK(throws_code(ErrorCode::LevelOutOfRange, [&] { b.radius_for_level(1.5); }));
  CHECK(throws_code(ErrorCode::LevelOutOfRange, [&] { obs.radius_for_level(-1.0); }));
}

TEST_CASE("observable profiles invert") {
  for (Shape s : {Shape::NegLog, Shape::PowerLaw, Shape::Bounded}) {
    Observable o = Observable::aperiodic(Point(0.3), s);
    o.s = 0.7;
    o.D = 2.0;
    for (double r : {1e-4, 0.01, 0.3}) CHECK(o.radius_for_level(o.g(r)) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("nested balls contract by the multiplier") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto o0 = Observable::periodic(pp_at(dbl, {0}));
  const double u01 = std::log(10.0);  // radius 0.1
  const auto n0 = nested_ball(o0, dbl, u01, 0);
  CHECK(n0.left == doctest::Approx(0.1));
  const auto n1 = nested_ball(o0, dbl, u01, 1);
  CHECK(n1.left == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(n1.right == doctest::Approx(0.05).epsilon(1e-12));
  // Oracle: x in U and f(x) in U.
  CHECK(n1.region.contains(0.049));
  CHECK_FALSE(n1.region.contains(0.051));

  const auto o13 = Observable::periodic(pp_at(dbl, {0, 1}));
  const auto m1 = nested_ball(o13, dbl, std::log(100.0), 1);
  CHECK(m1.left == doctest::Approx(0.0025).epsilon(1e-10));
  CHECK(m1.right == doctest::Approx(0.0025).epsilon(1e-10));

  const auto q = MapSystem::quadratic(2.0);
  const auto oh = Observable::periodic(pp_at(q, {1}));
  const auto qn = nested_ball(oh, q, std::log(100.0), 3);
  // Brute force: points just inside stay in U for three returns.
  const double zeta = oh.center.zeta.x;
  for (double x : {zeta - 0.99 * qn.left, zeta + 0.99 * qn.right}) {
    Point y = x;
    for (int k = 0; k < 3; ++k) {
      y = apply_map(q, y);
      CHECK(std::abs(y.x - zeta) < 0.01);
    }
  }
}

TEST_CASE("annulus depth") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto o0 = Observable::periodic(pp_at(dbl, {0}));
  const double u = std::log(10.0);
  CHECK(annulus_depth(0.07, o0, dbl, u) == 0);
  CHECK(annulus_depth(0.03, o0, dbl, u) == 1);
  CHECK_FALSE(annulus_depth(0.5, o0, dbl, u).has_value());
}

TEST_CASE("extremal index formulas") {
  const auto dbl = MapSystem::linear_mod_m(2);
  CHECK(theoretical_ei(dbl, pp_at(dbl, {0})) == doctest::Approx(0.5));
  CHECK(theoretical_ei(dbl, pp_at(dbl, {0, 1})) == doctest::Approx(0.75));
  const auto bern = MapSystem::bernoulli_doubling(0.3);
  const auto pb = pp_at(bern, {0});
  const Potential phi = bernoulli_potential(0.3);
  CHECK(theoretical_ei(bern, pb, &phi) == doctest::Approx(0.7));
  CHECK(throws_code(ErrorCode::MissingPotential, [&] { theoretical_ei(bern, pb); }));
  // The geometric potential reproduces 1 - 1/|Df^p|.
  const Potential geo = geometric_potential(dbl);
  CHECK(theoretical_ei(dbl, pp_at(dbl, {0, 1}), &geo) == doctest::Approx(0.75));
}

TEST_CASE("measures of regions") {
  const auto dbl = MapSystem::linear_mod_m(2);
  Region r;
  r.x = {{0.4, 0.6}};
  CHECK(measure_of_region(dbl, r).value == doctest::Approx(0.2));

  const auto q = MapSystem::quadratic(2.0);
  Region s;
  s.x = {{-0.1, 0.1}};
  CHECK(measure_of_region(q, s).value == doctest::Approx(0.063761).epsilon(1e-5));

  const auto bern = MapSystem::bernoulli_doubling(0.3);
  Region c;
  c.x = {{0.0, 0.25, true}};
  CHECK(measure_of_region(bern, c).value == doctest::Approx(0.09));

  // Monte Carlo measure for the intermittent map: the interval measures add.
  const auto mp = MapSystem::manneville_pomeau(0.3);
  MonteCarloOptions mc;
  mc.samples = 400'000;
  mc.seed = 1;
  Region lo, hi, all;
  lo.x = {{0.0, 0.5, true}};
  hi.x = {{0.5, 1.0, true}};
  all.x = {{0.0, 1.0, true}};
  const auto ml = measure_of_region(mp, lo, mc);
  const auto mh = measure_of_region(mp, hi, mc);
  CHECK(measure_of_region(mp, all, mc).value == doctest::Approx(1.0));
  CHECK(ml.value + mh.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ml.value > 0.5);  // mass piles up near the neutral fixed point
  CHECK(ml.std_error > 0.0);
}

TEST_CASE("conditional samples stay in the region") {
  Xoshiro256 rng(11);
  const auto dbl = MapSystem::linear_mod_m(2);
  Region r;
  r.x = {{0.0, 0.01, true}, {0.99, 1.0}};
  const auto bern = MapSystem::bernoulli_doubling(0.3);
  const auto q = MapSystem::quadratic(2.0);
  Region qr;
  qr.x = {{0.45, 0.55}};
  double low = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto a = sample_in_region(dbl, r, rng);
    CHECK(r.contains(a.point));
    const auto b = sample_in_region(bern, r, rng);
    CHECK(r.contains(b.point));
    low += b.point.x < 0.5 ? 1.0 : 0.0;
    CHECK(qr.contains(sample_in_region(q, qr, rng).point));
  }
  // Bernoulli mass of [0, 0.01) vs (0.99, 1): 0.3^7-ish vs 0.7^7-ish cylinders.
  const double w0 = bernoulli_cdf(0.3, 0.01);
  const double w1 = 1.0 - bernoulli_cdf(0.3, 0.99);
  CHECK(low / 2000.0 == doctest::Approx(w0 / (w0 + w1)).epsilon(0.15));
}

TEST_CASE("arc form of circle regions") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const Region r = ball(dbl, Point(0.0), 0.1, 0.1);
  const Arc arc = to_arc(r);
  for (double x : {0.0, 0.05, 0.0999, 0.9001, 0.95, 0.5, 0.1 + 1e-12, 0.9 - 1e-12}) {
    CHECK(arc.contains(to_fixed(x)) == r.contains(x));
  }
}
