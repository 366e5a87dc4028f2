#include <doctest.h>

#include <cmath>
#include <vector>

#include "repp/dynsys.hpp"
#include "repp/errors.hpp"

using namespace repp;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("single steps of each family") {
  const auto dbl = MapSystem::linear_mod_m(2);
  CHECK(iterate_point(dbl, 1.0 / 3.0, 1).x == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  for (double alpha : {0.1, 0.3, 0.8}) {
    CHECK(iterate_point(MapSystem::manneville_pomeau(alpha), 0.5, 1).x == 0.0);
  }

  const auto q = MapSystem::quadratic(2.0);
  CHECK(iterate_point(q, 0.0, 1).x == 1.0);
  CHECK(iterate_point(q, 0.0, 2).x == -1.0);
  CHECK(iterate_point(q, 0.0, 3).x == -1.0);
}

TEST_CASE("derivatives along orbits") {
  CHECK(derivative_along_orbit(MapSystem::linear_mod_m(2), 0.123, 5) == 32.0);
  const auto q = MapSystem::quadratic(2.0);
  CHECK(derivative_along_orbit(q, 0.5, 1) == doctest::Approx(2.0));
  // |Df(1) Df(-1) Df(-1)| by hand.
  CHECK(derivative_along_orbit(q, 1.0, 3) == 64.0);
  CHECK(code_of([&] { derivative_along_orbit(q, 1e-14, 1); }) == ErrorCode::NearSingularity);
}

TEST_CASE("periodic points from itineraries") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto p13 = find_periodic_point(dbl, std::vector<int>{0, 1});
  CHECK(p13.zeta.x == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(p13.prime_period == 2);
  CHECK(p13.multiplier == doctest::Approx(4.0));
  // Oracle: 4x = x mod 1 has solutions k/3.
  CHECK(std::abs(4.0 * p13.zeta.x - 1.0 - p13.zeta.x) < 1e-14);

  const auto p0 = find_periodic_point(dbl, std::vector<int>{0});
  CHECK(p0.zeta.x == 0.0);
  CHECK(p0.prime_period == 1);
  CHECK(p0.multiplier == 2.0);

  const auto q = MapSystem::quadratic(2.0);
  const auto ph = find_periodic_point(q, std::vector<int>{1});
  // Positive root of 2x^2 + x - 1.
  CHECK(ph.zeta.x == doctest::Approx((-1.0 + std::sqrt(9.0)) / 4.0).epsilon(1e-14));
  CHECK(ph.multiplier == doctest::Approx(2.0));

  // Repeated word collapses to the prime period.
  const auto rep = find_periodic_point(dbl, std::vector<int>{0, 1, 0, 1});
  CHECK(rep.prime_period == 2);

  const auto mp = MapSystem::manneville_pomeau(0.3);
  const auto pm = find_periodic_point(mp, std::vector<int>{1, 0});
  CHECK(pm.prime_period == 2);
  CHECK(pm.zeta.x > 0.5);
  CHECK(std::abs(iterate_point(mp, pm.zeta, 2).x - pm.zeta.x) < 1e-12);
}

TEST_CASE("periodic points of the torus") {
  const auto t = MapSystem::torus_linear();
  const auto pp = find_periodic_point(t, std::vector<int>{0, 0});
  CHECK(pp.zeta.x == 0.0);
  CHECK(pp.zeta.y == 0.0);
  CHECK(pp.multiplier == doctest::Approx(5.0));  // |det A|
  // Expanding in both directions.
  CHECK(t.eigenvalues[0] == doctest::Approx((5.0 + std::sqrt(5.0)) / 2.0));
  CHECK(std::abs(t.eigenvalues[1]) == doctest::Approx((5.0 - std::sqrt(5.0)) / 2.0));
  const auto p2 = find_periodic_point(t, std::vector<int>{1, 0, 0, 1});
  CHECK(p2.prime_period == 2);
  CHECK(domain_distance(t, iterate_point(t, p2.zeta, 2), p2.zeta) < 1e-12);
}

TEST_CASE("sampling is reproducible and follows the measure") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto a = sample_initial_conditions(dbl, 3, 42);
  const auto b = sample_initial_conditions(dbl, 3, 42);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i].x >= 0.0);
    CHECK(a[i].x < 1.0);
  }

  const auto bern = MapSystem::bernoulli_doubling(0.3);
  const auto pts = sample_initial_conditions(bern, 1'000'000, 7);
  double zeros = 0;
  for (const auto& p : pts) zeros += p.x < 0.5 ? 1.0 : 0.0;
  CHECK(zeros / 1e6 == doctest::Approx(0.3).epsilon(0.002 / 0.3));

  // Arcsine law: P(X < 0) = 1/2, P(|X| < 0.1) ~ 0.0638.
  const auto q = MapSystem::quadratic(2.0);
  const auto qs = sample_initial_conditions(q, 200'000, 3);
  double small = 0;
  for (const auto& p : qs) small += std::abs(p.x) < 0.1 ? 1.0 : 0.0;
  CHECK(small / 2e5 == doctest::Approx(2.0 * std::asin(0.1) / M_PI).epsilon(0.05));
}

TEST_CASE("digit tapes shift exactly") {
  const auto dbl = MapSystem::linear_mod_m(2);
  OrbitState st = sample_orbit_state(dbl, 5, 0);
  REQUIRE(st.tape.has_value());
  const double x0 = st.point.x;
  advance(dbl, st, 1);
  // One step of the tape equals one doubling up to the 2^-52 tail.
  CHECK(std::abs(st.point.x - std::fmod(2.0 * x0, 1.0)) < 1e-12);
  OrbitState far = iterate(dbl, sample_orbit_state(dbl, 5, 0), 10'000);
  advance(dbl, st, 9'999);
  CHECK(far.point == st.point);
  CHECK(far.tape->window(far.offset) == st.tape->window(st.offset));

  // Shift semantics: the window at offset k is the k-fold shift of the start.
  OrbitState s0 = sample_orbit_state(dbl, 9, 1);
  const auto& tape = *s0.tape;
  CHECK(tape.window(3) == ((tape.window(0) << 3) | (tape.window(64) >> 61)));
}

TEST_CASE("states from explicit points keep the prefix") {
  const auto dbl = MapSystem::linear_mod_m(2);
  OrbitState st = state_from_point(dbl, 0.03, 1);
  CHECK(st.point.x == doctest::Approx(0.03).epsilon(1e-15));
  advance(dbl, st, 2);
  CHECK(st.point.x == doctest::Approx(0.12).epsilon(1e-12));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK(code_of([] { MapSystem::linear_mod_m(1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { MapSystem::bernoulli_doubling(1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { MapSystem::quadratic(2.5); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { find_periodic_point(MapSystem::linear_mod_m(2), std::vector<int>{}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("fixed-point conversions") {
  CHECK(to_fixed(0.5) == (std::uint64_t{1} << 63));
  CHECK(from_fixed(to_fixed(0.375)) == 0.375);
  CHECK(from_fixed(~std::uint64_t{0}) < 1.0);
  CHECK(bernoulli_cdf(0.3, 0.25) == doctest::Approx(0.09));
  CHECK(arcsine_cdf(0.0) == doctest::Approx(0.5));
}
