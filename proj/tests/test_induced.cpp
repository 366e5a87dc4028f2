#include <doctest.h>

#include <vector>

#include "repp/cpdist.hpp"
#include "repp/errors.hpp"
#include "repp/induced.hpp"

using namespace repp;

namespace {

bool throws_code(ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

Region upper_half() {
  Region r;
  r.x = {{0.5, 1.0, true}};
  return r;
}

}  // namespace

TEST_CASE("first returns to the upper half of the intermittent map") {
  const auto mp = MapSystem::manneville_pomeau(0.3);
  const auto r1 = first_return(mp, upper_half(), Point(0.75));
  CHECK(r1.time == 1);
  CHECK(r1.landing.point.x == 0.5);
  // 0.6 -> 0.2 sits in the neutral branch and needs more steps to climb back.
  const auto r2 = first_return(mp, upper_half(), Point(0.6));
  CHECK(r2.time >= 2);
  CHECK(upper_half().contains(r2.landing.point));
  CHECK(throws_code(ErrorCode::InvalidArgument, [&] { first_return(mp, upper_half(), Point(0.2)); }));
}

TEST_CASE("inducing on the whole space changes nothing") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto ind = make_induced(dbl, std::nullopt);
  CHECK(ind.whole_space);
  CHECK(ind.mu_base == 1.0);
  CHECK(first_return(ind, state_from_point(dbl, 0.3, 1)).time == 1);

  const auto obs = Observable::periodic(find_periodic_point(dbl, std::vector<int>{0}));
  const auto sch = make_threshold(dbl, obs, 5000, 2.0);
  const auto isch = induced_schedule(ind, sch);
  CHECK(isch.n == sch.n);
  CHECK(isch.v == doctest::Approx(sch.v));
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto a = scan_exceedances(dbl, obs, sch, sample_orbit_state(dbl, 3, k), sch.n);
    const auto b = induced_process(ind, obs, isch, sample_orbit_state(dbl, 3, k), sch.n, 1);
    CHECK(a.times == b.times);
    CHECK(a.depths == b.depths);
    CHECK(a.clusters == b.clusters);
  }
}

TEST_CASE("induced period and measure") {
  const auto mp = MapSystem::manneville_pomeau(0.3);
  MonteCarloOptions mc;
  mc.samples = 200'000;
  mc.seed = 2;
  const auto ind = make_induced(mp, upper_half(), mc, 50);
  CHECK(ind.mu_base > 0.0);
  CHECK(ind.mu_base < 0.5);
  CHECK(ind.kac_constant == doctest::Approx(1.0 / ind.mu_base));
  const auto pp = find_periodic_point(mp, std::vector<int>{1, 0});
  CHECK(induced_period(ind, pp) == 1);

  const auto d = induced_diagnostics(ind, 2000, 4);
  CHECK(d.mean_return == doctest::Approx(d.kac_constant).epsilon(0.15));
  CHECK(d.min_derivative >= 1.0);
  const auto s = sample_induced(ind, 5, 0);
  CHECK(upper_half().contains(s.point));
}

TEST_CASE("count comparisons") {
  ReppCounts a, b;
  a.windows = b.windows = {WindowSet{{{0.0, 2.0}}}};
  a.counts = {pa_sample(PolyaAeppli(1.0, 2.0), 20'000, 1)};
  b.counts = {a.counts[0]};
  const auto same = compare_repp(a, 2.0, b, 2.0);
  CHECK(same.tv[0] == 0.0);
  CHECK(same.pass);

  // Negative control: clustered counts are far from Poisson ones.
  b.counts = {pa_sample(PolyaAeppli(0.4, 2.0), 20'000, 2)};
  const auto diff = compare_repp(a, 2.0, b, 2.0);
  CHECK(diff.tv[0] > 0.1);
  CHECK_FALSE(diff.pass);

  CHECK(throws_code(ErrorCode::MismatchedTau, [&] { compare_repp(a, 2.0, b, 1.0); }));
}
