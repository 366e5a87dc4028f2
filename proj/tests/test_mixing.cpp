#include <doctest.h>

#include <cmath>
#include <vector>

#include "repp/errors.hpp"
#include "repp/mixing.hpp"

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

}  // namespace

TEST_CASE("block sequences") {
  CHECK(k_n(1'000'000) == 190);  // log^2(10^6) = 190.87
  CHECK(k_n(1'000'000, KRule::CubeRoot) == 100);
  CHECK(k_n(2) == 1);
  CHECK((t_n(1000) == 99 || t_n(1000) == 100));  // pow rounding decides
  CHECK(t_n(1'000'000) >= 9999);
}

TEST_CASE("short-range sum from synthetic draws") {
  // Every draw is in Q^0 and every later step exceeds: S'(n) = n mu(U) (jmax - p).
  for (std::uint64_t n : {10'000ull, 100'000ull}) {
    const double mu = 1.0 / static_cast<double>(n);
    const auto est = dprime_core(n, KRule::LogSquared, mu, 50, [](std::uint64_t, std::uint64_t jmax) {
      return std::pair<bool, std::uint64_t>(true, jmax - 1);
    });
    CHECK(est.jmax == n / k_n(n));
    CHECK(est.value == doctest::Approx(static_cast<double>(est.jmax - 1)));
    CHECK(est.se == 0.0);
  }
  // Draws outside Q^0 contribute nothing.
  const auto none = dprime_core(1000, KRule::LogSquared, 0.01, 10, [](std::uint64_t, std::uint64_t) {
    return std::pair<bool, std::uint64_t>(false, 7);
  });
  CHECK(none.value == 0.0);
}

TEST_CASE("short-range sum on the doubling map decreases in n") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::periodic(find_periodic_point(dbl, std::vector<int>{0}));
  double prev = INFINITY;
  for (std::uint64_t n : {10'000ull, 1'000'000ull}) {
    const auto sch = make_threshold(dbl, obs, n, 1.0);
    const auto est = dprime_sum(dbl, obs, sch, 20'000, 4);
    CHECK(est.value < prev);
    prev = est.value;
  }
}

TEST_CASE("gamma at gap zero with the same annulus") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::periodic(find_periodic_point(dbl, std::vector<int>{0}));
  const auto sch = make_threshold(dbl, obs, 10'000, 1.0);
  EventSpec ev;
  ev.kind = EventSpec::Kind::Annulus;
  ev.kappa1 = 0;
  ev.annulus_kappa = 0;
  const auto g = estimate_gamma(dbl, obs, sch, 0, ev, 20'000, 2);
  CHECK(g.p_b_given_a == 1.0);
  CHECK(g.p_b == g.p_a);
  CHECK(g.gamma == doctest::Approx(g.p_a * (1.0 - g.p_a)).epsilon(1e-14));
  // About half of U is in Q^0.
  CHECK(g.p_a / sch.mu_ball == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("gamma of independent events is zero within noise") {
  GammaDraws d;
  d.conditional = [](std::uint64_t k) {
    auto rng = make_stream(31, k);
    const int depth = uniform01(rng) < 0.5 ? 0 : 1;
    return std::pair<int, bool>(depth, uniform01(rng) < 0.3);
  };
  d.unconditional = [](std::uint64_t k) {
    auto rng = make_stream(32, k);
    return uniform01(rng) < 0.3;
  };
  EventSpec ev;
  const auto g = gamma_core(ev, 0.01, 100'000, d);
  CHECK(g.gamma <= 3.0 * g.se);
  CHECK(g.p_a == doctest::Approx(0.005).epsilon(0.03));
}

TEST_CASE("degenerate events are rejected") {
  GammaDraws d;
  d.conditional = [](std::uint64_t) { return std::pair<int, bool>(3, true); };
  d.unconditional = [](std::uint64_t k) { return k % 2 == 0; };
  EventSpec ev;
  ev.kappa1 = 0;
  CHECK(throws_code(ErrorCode::DegenerateEvent, [&] { gamma_core(ev, 0.01, 1000, d); }));
  ev.kappa1 = 3;
  d.unconditional = [](std::uint64_t) { return true; };
  CHECK(throws_code(ErrorCode::DegenerateEvent, [&] { gamma_core(ev, 0.01, 1000, d); }));
}
