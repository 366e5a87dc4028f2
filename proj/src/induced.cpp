#include "repp/induced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "repp/cpdist.hpp"
#include "repp/errors.hpp"

namespace repp {

namespace {

Region whole_domain(const MapSystem& system) {
  Region r;
  const double lo = system.domain == Domain::SymmetricInterval ? -1.0 : 0.0;
  r.x = {{lo, 1.0, true}};
  if (system.domain == Domain::Torus) r.y = {{0.0, 1.0, true}};
  return r;
}

Point uniform_in(const Region& region, Xoshiro256& rng) {
  const auto pick = [&](const std::vector<Interval>& parts) {
    double total = 0.0;
    for (const auto& iv : parts) total += iv.length();
    double u = uniform01(rng) * total;
    for (const auto& iv : parts) {
      if (u < iv.length()) return iv.lo + u;
      u -= iv.length();
    }
    return parts.back().lo;
  };
  Point p(pick(region.x));
  if (!region.y.empty()) p.y = pick(region.y);
  return p;
}

}  // namespace

InducedSystem make_induced(const MapSystem& system, std::optional<Region> base_set, const MonteCarloOptions& mc,
                           std::uint64_t burn_in_returns) {
  InducedSystem ind;
  ind.base = system;
  ind.burn_in_returns = burn_in_returns;
  if (!base_set) {
    ind.whole_space = true;
    ind.base_set = whole_domain(system);
    return ind;
  }
  if (base_set->empty()) fail(ErrorCode::InvalidArgument, "empty base set");
  ind.base_set = *base_set;
  const MeasureEstimate m = measure_of_region(system, ind.base_set, mc);
  if (!(m.value > 0.0)) fail(ErrorCode::InvalidArgument, "base set has zero measure");
  ind.mu_base = m.value;
  ind.mu_base_se = m.std_error;
  ind.kac_constant = 1.0 / m.value;
  return ind;
}

FirstReturn first_return(const InducedSystem& ind, OrbitState x) {
  if (ind.whole_space) {
    advance(ind.base, x, 1);
    return {1, std::move(x)};
  }
  const RegionTest test(ind.base, ind.base_set);
  if (!test.contains(x)) fail(ErrorCode::InvalidArgument, "first return needs a point of the base set");
  const std::uint64_t r = first_entry(ind.base, test, x, ind.return_cap);
  return {r, std::move(x)};
}

FirstReturn first_return(const MapSystem& system, const Region& base_set, Point x, std::uint64_t cap) {
  const RegionTest test(system, base_set);
  if (!test.contains(x)) fail(ErrorCode::InvalidArgument, "first return needs a point of the base set");
  OrbitState st = state_from_point(system, x);
  const std::uint64_t r = first_entry(system, test, st, cap);
  return {r, std::move(st)};
}

int induced_period(const InducedSystem& ind, const PeriodicPoint& pp) {
  if (!ind.base_set.contains(pp.zeta)) fail(ErrorCode::InvalidArgument, "zeta must lie in the base set");
  int visits = 0;
  Point x = pp.zeta;
  for (int j = 0; j < pp.prime_period; ++j) {
    if (ind.base_set.contains(x)) ++visits;
    x = apply_map(ind.base, x);
  }
  return visits;
}

OrbitState sample_induced(const InducedSystem& ind, std::uint64_t seed, std::uint64_t stream) {
  if (ind.whole_space) return sample_orbit_state(ind.base, seed, stream);
  auto rng = make_stream(seed, stream, 0x1D);
  if (ind.base.analytic_measure()) return sample_in_region(ind.base, ind.base_set, rng);
  OrbitState st = state_from_point(ind.base, uniform_in(ind.base_set, rng), rng());
  for (std::uint64_t i = 0; i < ind.burn_in_returns; ++i) st = first_return(ind, std::move(st)).landing;
  return st;
}

ThresholdSchedule induced_schedule(const InducedSystem& ind, const ThresholdSchedule& original) {
  ThresholdSchedule s = original;
  s.n = static_cast<std::uint64_t>(std::llround(static_cast<double>(original.n) * ind.mu_base));
  s.mu_ball = original.mu_ball / ind.mu_base;
  s.v = 1.0 / s.mu_ball;
  return s;
}

ClusterSeries induced_process(const InducedSystem& ind, const Observable& obs, const ThresholdSchedule& schedule,
                              OrbitState st, std::uint64_t horizon, int p_hat) {
  if (p_hat < 1) fail(ErrorCode::InvalidArgument, "induced period must be >= 1");
  const Region U = ball_for_threshold(ind.base, obs, schedule.u);
  const RegionTest test(ind.base, U);
  std::vector<std::uint64_t> times;
  const auto lag = static_cast<std::uint64_t>(p_hat);
  std::uint64_t i = 0;
  for (; i < horizon; ++i) {
    if (test.contains(st)) times.push_back(i);
    st = first_return(ind, std::move(st)).landing;
  }
  // Resolve depths of chains still alive at the horizon.
  for (; !times.empty() && times.back() + lag >= i; ++i) {
    if (i - horizon > lag * (static_cast<std::uint64_t>(kMaxDepth) + 2)) {
      fail(ErrorCode::DepthOverflow, "depth exceeds 1e6");
    }
    if (test.contains(st)) times.push_back(i);
    st = first_return(ind, std::move(st)).landing;
  }
  return make_series(std::move(times), horizon, p_hat);
}

ReppComparison compare_repp(const ReppCounts& original, double tau_original, const ReppCounts& induced,
                            double tau_induced, double threshold) {
  if (std::abs(tau_original - tau_induced) > 1e-12 * std::max(tau_original, tau_induced)) {
    fail(ErrorCode::MismatchedTau, "tau differs between the two systems");
  }
  if (original.counts.size() != induced.counts.size()) {
    fail(ErrorCode::InvalidArgument, "window lists differ");
  }
  ReppComparison cmp;
  cmp.threshold = threshold;
  cmp.pass = true;
  for (std::size_t w = 0; w < original.counts.size(); ++w) {
    const double tv = empirical_tv(original.counts[w], induced.counts[w]);
    cmp.tv.push_back(tv);
    cmp.pass = cmp.pass && tv < threshold;
  }
  return cmp;
}

InducedDiagnostics induced_diagnostics(const InducedSystem& ind, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 2) fail(ErrorCode::TooFewObservations, "need at least two samples");
  InducedDiagnostics d;
  d.kac_constant = ind.kac_constant;
  d.min_derivative = std::numeric_limits<double>::infinity();
  std::vector<double> r(samples);
  for (std::uint64_t k = 0; k < samples; ++k) {
    OrbitState st = sample_induced(ind, seed, k);
    const Point x = st.point;
    const FirstReturn fr = first_return(ind, std::move(st));
    r[k] = static_cast<double>(fr.time);
    d.min_derivative = std::min(d.min_derivative, derivative_along_orbit(ind.base, x, fr.time));
  }
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples - 1);
  d.mean_return = mean;
  d.mean_return_se = std::sqrt(var / static_cast<double>(samples));
  return d;
}

}  // namespace repp
