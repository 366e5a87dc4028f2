#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "repp/errors.hpp"
#include "repp/extremes.hpp"

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

ThresholdSchedule with_v(double v, std::uint64_t n = 100) {
  ThresholdSchedule s;
  s.n = n;
  s.v = v;
  s.tau = static_cast<double>(n) / v;
  return s;
}

}  // namespace

TEST_CASE("analytic thresholds") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::aperiodic(Point(0.5));
  const auto s1 = make_threshold(dbl, obs, 1000, 1.0);
  CHECK(s1.u == doctest::Approx(std::log(2000.0)).epsilon(1e-12));
  CHECK(s1.v == doctest::Approx(1000.0).epsilon(1e-8));
  CHECK(1000.0 * s1.mu_ball == doctest::Approx(1.0).epsilon(1e-8));
  const auto s2 = make_threshold(dbl, obs, 1000, 2.0);
  CHECK(s2.u == doctest::Approx(std::log(1000.0)).epsilon(1e-12));

  CHECK(code_of([&] { make_threshold(dbl, obs, 1000, 0.0); }) == ErrorCode::InvalidArgument);
  const auto mp = MapSystem::manneville_pomeau(0.3);
  CHECK(code_of([&] { make_threshold(mp, Observable::aperiodic(Point(0.7)), 1000, 1.0); }) ==
        ErrorCode::TailUnavailable);
}

TEST_CASE("empirical quantile thresholds") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::aperiodic(Point(0.3));
  const auto s = make_threshold(dbl, obs, 1000, 1.0, ThresholdMethod::EmpiricalQuantile, 10'000'000, 5);
  CHECK(s.mu_se > 0.0);
  CHECK(std::abs(2.0 * s.radius - 1e-3) < 3.0 * s.mu_se);
}

TEST_CASE("scanning a short orbit") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::periodic(find_periodic_point(dbl, std::vector<int>{0}));
  // Ball of radius 0.1 around 0.
  const auto sch = make_threshold(dbl, obs, 10, 2.0);
  CHECK(sch.radius == doctest::Approx(0.1));
  const auto s = scan_exceedances(dbl, obs, sch, state_from_point(dbl, 0.03, 1), 3);
  CHECK(s.times == std::vector<std::uint64_t>{0, 1});
  CHECK(s.depths == std::vector<int>{1, 0});
  REQUIRE(s.clusters.size() == 1);
  CHECK(s.clusters[0] == Cluster{0, 2});

  // 1/3 and 2/3 alternate for as long as the digits of the double last.
  const auto never = scan_exceedances(dbl, obs, sch, state_from_point(dbl, 1.0 / 3.0, 1), 40);
  CHECK((never.times.empty() || never.times.front() >= 40));
}

TEST_CASE("mean exceedance count over many trials is tau") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::aperiodic(Point(0.3));
  const auto sch = make_threshold(dbl, obs, 10'000, 2.0);
  std::vector<OrbitState> init;
  for (std::uint64_t k = 0; k < 2000; ++k) init.push_back(sample_orbit_state(dbl, 21, k));
  const auto all = scan_many(dbl, obs, sch, std::move(init), sch.n);
  double total = 0.0, sq = 0.0;
  for (const auto& s : all) {
    total += static_cast<double>(s.times.size());
    sq += static_cast<double>(s.times.size() * s.times.size());
  }
  const double mean = total / 2000.0;
  const double se = std::sqrt((sq / 2000.0 - mean * mean) / 2000.0);
  CHECK(std::abs(mean - 2.0) < 3.0 * se);
}

TEST_CASE("cluster extraction by exact lag") {
  auto a = make_series({5, 7, 9, 14}, 100, 2);
  CHECK(a.clusters == std::vector<Cluster>{{5, 3}, {14, 1}});
  auto b = make_series({3, 4, 5, 9}, 100, 1);
  CHECK(b.clusters == std::vector<Cluster>{{3, 3}, {9, 1}});
  auto c = make_series({0, 2, 3, 5}, 100, 2);
  CHECK(c.clusters == std::vector<Cluster>{{0, 2}, {3, 2}});
  // Sizes are depth + 1 at the cluster start, and they add up.
  CHECK(a.depths == std::vector<int>{2, 1, 0, 0});
  std::uint64_t sum = 0;
  for (const auto& cl : c.clusters) sum += cl.size;
  CHECK(sum == c.times.size());
  CHECK(code_of([] { make_series({3, 3}, 10, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("counts in rescaled windows") {
  const auto one = make_series({0}, 100, 1);
  CHECK(build_repp(one, with_v(10.0), WindowSet{{{0.0, 1.0}}}) == 1);
  // 10 is the first index of [1, 2) in rescaled time, so it is not counted.
  const auto three = make_series({0, 10, 25}, 100, 1);
  CHECK(build_repp(three, with_v(10.0), WindowSet{{{0.0, 1.0}, {2.0, 3.0}}}) == 2);
  CHECK(build_repp(three, with_v(10.0), WindowSet{{{0.0, 2.0}, {2.0, 3.0}}}) == 3);
  const auto none = make_series({}, 100, 1);
  CHECK(build_repp(none, with_v(10.0), WindowSet{{{0.0, 5.0}}}) == 0);
  CHECK(code_of([&] { build_repp(one, with_v(10.0), WindowSet{{{0.0, 11.0}}}); }) ==
        ErrorCode::WindowBeyondHorizon);
}

TEST_CASE("extremal index estimators on synthetic series") {
  const auto sch = with_v(1.0, 100'000);
  std::vector<ClusterSeries> singles;
  for (int k = 0; k < 10; ++k) singles.push_back(make_series({10, 50, 90, 400, 900}, 1000, 1));
  const auto e1 = estimate_ei(singles, sch, 1, 3);
  CHECK(e1.theta_ratio == 1.0);
  CHECK(e1.theta_cluster == 1.0);
  CHECK(e1.theta_runs == 1.0);

  // Geometric cluster sizes with theta = 0.5.
  std::mt19937_64 gen(8);
  std::geometric_distribution<int> extra(0.5);
  std::vector<ClusterSeries> geo;
  for (int k = 0; k < 200; ++k) {
    std::vector<std::uint64_t> t;
    for (std::uint64_t start = 0; start < 2000; start += 100) {
      const int size = 1 + extra(gen);
      for (int j = 0; j < size && j < 90; ++j) t.push_back(start + static_cast<std::uint64_t>(j));
    }
    geo.push_back(make_series(std::move(t), 100'000, 1));
  }
  const auto e2 = estimate_ei(geo, sch, 1, 4);
  CHECK(e2.cluster_ci.covers(0.5));
  CHECK(e2.theta_cluster == doctest::Approx(0.5).epsilon(0.06));
  CHECK(e2.theta_ratio == doctest::Approx(e2.theta_cluster));
  CHECK(e2.cluster_ci.lo < e2.cluster_ci.hi);

  std::vector<ClusterSeries> few{make_series({1, 5}, 100, 1)};
  CHECK(code_of([&] { estimate_ei(few, sch, 1); }) == ErrorCode::TooFewClusters);

  const auto h = cluster_size_histogram(geo);
  std::uint64_t exc = 0;
  for (std::size_t s = 0; s < h.size(); ++s) exc += s * h[s];
  std::uint64_t total = 0;
  for (const auto& s : geo) total += s.times.size();
  CHECK(exc == total);
}

TEST_CASE("extreme value law") {
  std::vector<ClusterSeries> s{make_series({}, 10, 1), make_series({3}, 10, 1), make_series({12}, 20, 1)};
  const auto e = evl_from_series(s, 10);
  CHECK(e.value == doctest::Approx(2.0 / 3.0));
  CHECK(e.ci.covers(e.value));

  const auto dbl = MapSystem::linear_mod_m(2);
  const auto obs = Observable::periodic(find_periodic_point(dbl, std::vector<int>{0}));
  const auto sch = make_threshold(dbl, obs, 10'000, 1.0);
  const auto ev = empirical_evl(dbl, obs, sch, 4000, 17);
  CHECK(std::abs(ev.value - std::exp(-0.5)) < 0.03);
}

TEST_CASE("empirical CDFs and the HTS/RTS relation") {
  const EmpiricalCdf step({0.3, 0.3, 0.3});
  CHECK(step(0.29) == 0.0);
  CHECK(step(0.3) == 1.0);
  CHECK(step.left_limit(0.3) == 0.0);

  std::mt19937_64 gen(5);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> a(100'000), b(100'000);
  for (auto& x : a) x = ex(gen);
  for (auto& x : b) x = ex(gen);
  const EmpiricalCdf G(a), Gt(b);
  CHECK(hts_rts_consistency(G, Gt) < 0.02);
  CHECK(G.ks_distance([](double t) { return 1.0 - std::exp(-t); }) < 0.01);

  // Returns always at 1: G must be uniform on [0, 1].
  std::vector<double> u(20'000);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (static_cast<double>(i) + 0.5) / 20'000.0;
  CHECK(hts_rts_consistency(EmpiricalCdf(u), EmpiricalCdf(std::vector<double>(50, 1.0))) < 1e-3);
}

TEST_CASE("hitting times at a generic point are exponential") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const Region r = ball(dbl, Point(0.6180339887498949), 5e-4, 5e-4);
  const auto h = empirical_hts_rts(dbl, r, 10'000, 3);
  CHECK(h.mu == doctest::Approx(1e-3));
  const auto exp1 = [](double t) { return 1.0 - std::exp(-t); };
  CHECK(h.hts.ks_distance(exp1) < 0.02);
  CHECK(hts_rts_consistency(h.hts, h.rts) < 0.03);
}

TEST_CASE("Kac's lemma") {
  const auto dbl = MapSystem::linear_mod_m(2);
  Region r;
  r.x = {{0.0, 0.01, true}, {0.99, 1.0}};
  const auto k = kac_check(dbl, r, 100'000, 6);
  CHECK(k.inverse_measure == doctest::Approx(50.0));
  CHECK(k.relative_deviation < 0.02);

  Region all;
  all.x = {{0.0, 1.0, true}};
  const auto f = kac_check(dbl, all, 1000, 6);
  CHECK(f.mean_return == 1.0);
  CHECK(f.relative_deviation == doctest::Approx(0.0));
}

TEST_CASE("first entry respects the cap") {
  const auto dbl = MapSystem::linear_mod_m(2);
  const RegionTest test(dbl, ball(dbl, Point(0.5), 0.01, 0.01));
  // The first 64 digits of 0 are zeros, so nothing happens for 64 steps.
  OrbitState st = state_from_point(dbl, 0.0, 0);
  CHECK(code_of([&] { first_entry(dbl, test, st, 50); }) == ErrorCode::ReturnCapExceeded);
}
