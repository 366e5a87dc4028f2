#include "repp/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "repp/errors.hpp"
#include "repp/kernels.hpp"
#include "repp/parallel.hpp"

namespace repp {

namespace {

std::uint64_t uniform_index(Xoshiro256& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

double max_radius(const MapSystem& system) {
  // Largest radius for which a ball is still a proper subset of the domain.
  return system.domain == Domain::Circle || system.domain == Domain::Torus ? 0.5 : 1.0;
}

// Continues scanning past the horizon while a lag-p chain may still be alive.
void extend_tail(const OrbitScanner& sc, OrbitState& st, std::uint64_t horizon, int p, std::vector<std::uint64_t>& times) {
  const auto lag = static_cast<std::uint64_t>(p);
  std::uint64_t t = horizon;
  while (!times.empty() && times.back() + lag >= t) {
    sc.run(st, t, t + lag, times);
    t += lag;
    if (t - horizon > lag * (static_cast<std::uint64_t>(kMaxDepth) + 2)) {
      fail(ErrorCode::DepthOverflow, "depth exceeds 1e6");
    }
  }
}

std::vector<int> chain_depths(const std::vector<std::uint64_t>& times, int p) {
  const auto lag = static_cast<std::uint64_t>(p);
  std::vector<int> depth(times.size(), 0);
  std::vector<std::size_t> next(times.size(), times.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    while (j < times.size() && times[j] < times[i] + lag) ++j;
    if (j < times.size() && times[j] == times[i] + lag) next[i] = j;
  }
  for (std::size_t i = times.size(); i-- > 0;) {
    if (next[i] < times.size()) {
      depth[i] = depth[next[i]] + 1;
      if (depth[i] > kMaxDepth) fail(ErrorCode::DepthOverflow, "depth exceeds 1e6");
    }
  }
  return depth;
}

ClusterSeries finalize(std::vector<std::uint64_t> times, std::uint64_t horizon, int p) {
  ClusterSeries s;
  s.window_length = horizon;
  s.depths = chain_depths(times, p);
  const auto keep = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), horizon) - times.begin());
  times.resize(keep);
  s.depths.resize(keep);
  s.times = std::move(times);
  extract_clusters(s, p);
  return s;
}

Ci wilson(double successes, double n) {
  const double z = 1.959963984540054;
  const double ph = successes / n;
  const double den = 1.0 + z * z / n;
  const double mid = (ph + z * z / (2 * n)) / den;
  const double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den;
  return {mid - half, mid + half};
}

}  // namespace

// ---------------------------------------------------------------------------
// Thresholds

ThresholdSchedule make_threshold(const MapSystem& system, const Observable& obs, std::uint64_t n, double tau,
                                 ThresholdMethod method, std::uint64_t calibration_length, std::uint64_t seed) {
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be positive");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be positive");
  ThresholdSchedule sch;
  sch.n = n;
  sch.tau = tau;
  sch.method = method;
  const double target = tau / static_cast<double>(n);
  const Point zeta = obs.center.zeta;
  double r = 0.0;
  if (method == ThresholdMethod::Analytic) {
    if (!system.analytic_measure()) {
      fail(ErrorCode::TailUnavailable, "no closed-form measure; use the empirical quantile method");
    }
    const auto mass = [&](double rad) { return measure_of_region(system, ball(system, zeta, rad, rad)).value; };
    double lo = 0.0;
    double hi = max_radius(system);
    if (mass(hi) < target) fail(ErrorCode::LevelOutOfRange, "tau/n exceeds the largest ball");
    for (int it = 0; it < 200 && hi - lo > 0x1.0p-60 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mass(mid) < target ? lo : hi) = mid;
    }
    r = 0.5 * (lo + hi);
  } else {
    if (calibration_length == 0) fail(ErrorCode::InvalidArgument, "calibration length must be positive");
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(calibration_length) * target));
    if (k < 1) fail(ErrorCode::TooFewObservations, "calibration orbit too short for tau/n");
    // k+1 smallest distances along one orbit, tagged with their batch.
    constexpr std::uint64_t kBatches = 50;
    const std::uint64_t per = std::max<std::uint64_t>(1, calibration_length / kBatches);
    std::priority_queue<std::pair<double, std::uint64_t>> heap;
    OrbitState st = sample_orbit_state(system, seed, 0xCA11B);
    for (std::uint64_t i = 0; i < calibration_length; ++i) {
      const double d = domain_distance(system, st.point, zeta);
      if (heap.size() < k + 1) {
        heap.emplace(d, std::min(i / per, kBatches - 1));
      } else if (d < heap.top().first) {
        heap.pop();
        heap.emplace(d, std::min(i / per, kBatches - 1));
      }
      advance(system, st, 1);
    }
    const double d_next = heap.top().first;
    heap.pop();
    r = 0.5 * (heap.top().first + d_next);
    std::vector<double> batch(kBatches, 0.0);
    while (!heap.empty()) {
      batch[heap.top().second] += 1.0 / static_cast<double>(per);
      heap.pop();
    }
    double mean = 0.0;
    for (double b : batch) mean += b;
    mean /= kBatches;
    double var = 0.0;
    for (double b : batch) var += (b - mean) * (b - mean);
    var /= kBatches - 1;
    sch.mu_se = std::sqrt(var / kBatches);
    sch.calibration_length = calibration_length;
    sch.mu_ball = static_cast<double>(k) / static_cast<double>(calibration_length);
  }
  sch.u = obs.g(r);
  sch.radius = obs.radius_for_level(sch.u);
  if (method == ThresholdMethod::Analytic) {
    sch.mu_ball = measure_of_region(system, ball(system, zeta, sch.radius, sch.radius)).value;
  }
  sch.v = 1.0 / sch.mu_ball;
  return sch;
}

// ---------------------------------------------------------------------------
// Scanning

OrbitScanner::OrbitScanner(const MapSystem& system, const RegionTest& test) : system_(system), test_(test) {
  if (system.binary_tape() && system.family != Family::CountableBranch) {
    arc_ = test.arc();
  } else if (system.family == Family::Quadratic && test.region().x.size() == 1) {
    quadratic_ = true;
  }
}

void OrbitScanner::run(OrbitState& st, std::uint64_t t0, std::uint64_t t1, std::vector<std::uint64_t>& out) const {
  if (t1 <= t0) return;
  const std::uint64_t len = t1 - t0;
  if (arc_ && st.tape) {
    DigitTape& tape = *st.tape;
    tape.ensure(st.offset + len + 64);
    const std::size_t first = out.size();
    kernels::scan_arc(tape.words(), st.offset, st.offset + len, *arc_, out);
    for (std::size_t i = first; i < out.size(); ++i) out[i] = out[i] - st.offset + t0;
    st.offset += len;
    refresh_point(system_, st);
    return;
  }
  if (quadratic_) {
    double x = st.point.x;
    std::vector<std::uint64_t>* lane = &out;
    kernels::quadratic_scan(system_.a, std::span<double>(&x, 1), len, t0, test_.region().x[0],
                            std::span<std::vector<std::uint64_t>>(lane, 1));
    st.point = x;
    return;
  }
  for (std::uint64_t t = t0; t < t1; ++t) {
    if (test_.contains(st)) out.push_back(t);
    advance(system_, st, 1);
  }
}

std::uint64_t OrbitScanner::first(OrbitState& st, std::uint64_t t0, std::uint64_t cap) const {
  if (arc_ && st.tape) {
    std::vector<std::uint64_t> hits;
    std::uint64_t chunk = 4096;
    std::uint64_t t = t0;
    while (t - t0 < cap) {
      const std::uint64_t len = std::min(chunk, t0 + cap - t);
      DigitTape& tape = *st.tape;
      tape.ensure(st.offset + len + 64);
      kernels::scan_arc(tape.words(), st.offset, st.offset + len, *arc_, hits);
      if (!hits.empty()) {
        const std::uint64_t pos = hits.front();
        t += pos - st.offset;
        st.offset = pos;
        refresh_point(system_, st);
        return t;
      }
      st.offset += len;
      t += len;
      chunk = std::min<std::uint64_t>(chunk * 2, 1u << 22);
    }
    refresh_point(system_, st);
    return t0 + cap;
  }
  for (std::uint64_t t = t0; t < t0 + cap; ++t) {
    if (test_.contains(st)) return t;
    advance(system_, st, 1);
  }
  return t0 + cap;
}


ClusterSeries scan_exceedances(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                               OrbitState initial, std::uint64_t horizon) {
  const RegionTest test(system, ball_for_threshold(system, obs, schedule.u));
  const OrbitScanner sc(system, test);
  std::vector<std::uint64_t> times;
  sc.run(initial, 0, horizon, times);
  extend_tail(sc, initial, horizon, obs.period(), times);
  return finalize(std::move(times), horizon, obs.period());
}

std::vector<ClusterSeries> scan_many(const MapSystem& system, const Observable& obs,
                                     const ThresholdSchedule& schedule, std::vector<OrbitState> initial,
                                     std::uint64_t horizon, unsigned threads) {
  std::vector<ClusterSeries> out(initial.size());
  const RegionTest test(system, ball_for_threshold(system, obs, schedule.u));
  const OrbitScanner sc(system, test);
  const int p = obs.period();
  if (system.family == Family::Quadratic && test.region().x.size() == 1) {
    constexpr std::size_t kLanes = 16;
    const std::size_t blocks = (initial.size() + kLanes - 1) / kLanes;
    parallel_for(blocks, threads, [&](std::size_t b) {
      const std::size_t first = b * kLanes;
      const std::size_t count = std::min(kLanes, initial.size() - first);
      std::vector<double> x(count);
      std::vector<std::vector<std::uint64_t>> hits(count);
      for (std::size_t i = 0; i < count; ++i) x[i] = initial[first + i].point.x;
      kernels::quadratic_scan(system.a, x, horizon, 0, test.region().x[0], hits);
      for (std::size_t i = 0; i < count; ++i) {
        in_trial(first + i, [&] {
          OrbitState st;
          st.point = x[i];
          extend_tail(sc, st, horizon, p, hits[i]);
          out[first + i] = finalize(std::move(hits[i]), horizon, p);
        });
      }
    });
    return out;
  }
  parallel_for(initial.size(), threads, [&](std::size_t i) {
    in_trial(i, [&] {
      std::vector<std::uint64_t> times;
      sc.run(initial[i], 0, horizon, times);
      extend_tail(sc, initial[i], horizon, p, times);
      out[i] = finalize(std::move(times), horizon, p);
      initial[i] = OrbitState{};  // release the tape
    });
  });
  return out;
}

ClusterSeries make_series(std::vector<std::uint64_t> times, std::uint64_t window_length, int p) {
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end()) {
    fail(ErrorCode::InvalidArgument, "exceedance times must be strictly increasing");
  }
  return finalize(std::move(times), window_length, p);
}

void extract_clusters(ClusterSeries& s, int p) {
  if (p < 1) fail(ErrorCode::InvalidArgument, "period must be >= 1");
  const auto lag = static_cast<std::uint64_t>(p);
  s.clusters.clear();
  std::vector<std::size_t> owner(s.times.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const std::uint64_t t = s.times[i];
    while (j < i && s.times[j] + lag < t) ++j;
    if (j < i && s.times[j] + lag == t) {
      owner[i] = owner[j];
      ++s.clusters[owner[i]].size;
    } else {
      owner[i] = s.clusters.size();
      s.clusters.push_back({t, 1});
    }
  }
}

// ---------------------------------------------------------------------------
// Counts

double WindowSet::mass() const {
  double m = 0.0;
  for (const auto& [a, b] : parts) m += b - a;
  return m;
}

double WindowSet::sup() const {
  double m = 0.0;
  for (const auto& part : parts) m = std::max(m, part.second);
  return m;
}

std::uint64_t build_repp(const ClusterSeries& s, const ThresholdSchedule& schedule, const WindowSet& J) {
  std::uint64_t count = 0;
  for (const auto& [a, b] : J.parts) {
    if (a < 0.0 || b < a) fail(ErrorCode::InvalidArgument, "windows must satisfy 0 <= a <= b");
    if (b * schedule.v > static_cast<double>(s.window_length) * (1.0 + 1e-12)) {
      fail(ErrorCode::WindowBeyondHorizon, "window end " + std::to_string(b) + " exceeds the scanned horizon");
    }
    const auto lo = static_cast<std::uint64_t>(std::ceil(a * schedule.v));
    const auto hi = static_cast<std::uint64_t>(std::ceil(b * schedule.v));
    count += static_cast<std::uint64_t>(std::lower_bound(s.times.begin(), s.times.end(), hi) -
                                        std::lower_bound(s.times.begin(), s.times.end(), lo));
  }
  return count;
}

ReppCounts build_repp(std::span<const ClusterSeries> series, const ThresholdSchedule& schedule,
                      const std::vector<WindowSet>& windows) {
  ReppCounts rc;
  rc.windows = windows;
  rc.counts.assign(windows.size(), std::vector<std::uint64_t>(series.size(), 0));
  for (std::size_t w = 0; w < windows.size(); ++w) {
    for (std::size_t k = 0; k < series.size(); ++k) rc.counts[w][k] = build_repp(series[k], schedule, windows[w]);
  }
  return rc;
}

// ---------------------------------------------------------------------------
// Extremal index

EIEstimate estimate_ei(std::span<const ClusterSeries> series, const ThresholdSchedule& schedule, int p,
                       std::uint64_t seed) {
  const auto lag = static_cast<std::uint64_t>(p);
  const std::size_t T = series.size();
  std::vector<double> exc(T), clu(T), dep0(T), runs(T);
  for (std::size_t k = 0; k < T; ++k) {
    ClusterSeries s = series[k];
    extract_clusters(s, p);
    exc[k] = static_cast<double>(s.times.size());
    clu[k] = static_cast<double>(s.clusters.size());
    double d0 = 0.0;
    for (int d : s.depths) d0 += d == 0 ? 1.0 : 0.0;
    dep0[k] = d0;
    double r = 0.0;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      if (i == 0 || s.times[i] - s.times[i - 1] > lag) r += 1.0;
    }
    runs[k] = r;
  }
  const auto total = [](const std::vector<double>& v) {
    double t = 0.0;
    for (double x : v) t += x;
    return t;
  };
  EIEstimate est;
  est.n = schedule.n;
  est.u = schedule.u;
  const double E = total(exc);
  est.exceedances = static_cast<std::uint64_t>(E);
  est.clusters = static_cast<std::uint64_t>(total(clu));
  if (est.clusters < 30) fail(ErrorCode::TooFewClusters, "need at least 30 clusters, saw " + std::to_string(est.clusters));
  est.theta_cluster = total(clu) / E;
  est.theta_ratio = total(dep0) / E;
  est.theta_runs = total(runs) / E;

  auto rng = make_stream(seed, 0xB0075);
  std::vector<double> bc(kBootstrapResamples), br(kBootstrapResamples), bu(kBootstrapResamples);
  for (int b = 0; b < kBootstrapResamples; ++b) {
    double e = 0, c = 0, d = 0, r = 0;
    for (std::size_t i = 0; i < T; ++i) {
      const std::size_t k = uniform_index(rng, T);
      e += exc[k];
      c += clu[k];
      d += dep0[k];
      r += runs[k];
    }
    bc[b] = e > 0 ? c / e : 1.0;
    br[b] = e > 0 ? d / e : 1.0;
    bu[b] = e > 0 ? r / e : 1.0;
  }
  const auto percentile = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const auto at = [&](double q) {
      const double pos = q * static_cast<double>(v.size() - 1);
      const auto i = static_cast<std::size_t>(pos);
      const double f = pos - static_cast<double>(i);
      return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v[i];
    };
    return Ci{at(0.025), at(0.975)};
  };
  est.cluster_ci = percentile(bc);
  est.ratio_ci = percentile(br);
  est.runs_ci = percentile(bu);
  return est;
}

std::vector<std::uint64_t> cluster_size_histogram(std::span<const ClusterSeries> series) {
  std::vector<std::uint64_t> h(2, 0);
  for (const auto& s : series) {
    for (const auto& c : s.clusters) {
      if (c.size >= h.size()) h.resize(c.size + 1, 0);
      ++h[c.size];
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// EVL, HTS, RTS

EvlEstimate evl_from_series(std::span<const ClusterSeries> series, std::uint64_t n) {
  if (series.empty()) fail(ErrorCode::TooFewObservations, "no trials");
  double none = 0.0;
  for (const auto& s : series) none += (s.times.empty() || s.times.front() >= n) ? 1.0 : 0.0;
  const double T = static_cast<double>(series.size());
  return {none / T, wilson(none, T), series.size()};
}

EvlEstimate empirical_evl(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                          std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials == 0) fail(ErrorCode::TooFewObservations, "no trials");
  const RegionTest test(system, ball_for_threshold(system, obs, schedule.u));
  const OrbitScanner sc(system, test);
  std::vector<char> clean(trials, 0);
  parallel_for(trials, threads, [&](std::size_t k) {
    in_trial(k, [&] {
      OrbitState st = sample_orbit_state(system, seed, k);
      clean[k] = sc.first(st, 0, schedule.n) >= schedule.n ? 1 : 0;
    });
  });
  double none = 0.0;
  for (char c : clean) none += c;
  const double T = static_cast<double>(trials);
  return {none / T, wilson(none, T), trials};
}

std::uint64_t first_entry(const MapSystem& system, const RegionTest& test, OrbitState& state, std::uint64_t cap) {
  const OrbitScanner sc(system, test);
  advance(system, state, 1);
  const std::uint64_t t = sc.first(state, 1, cap);
  if (t >= 1 + cap) fail(ErrorCode::ReturnCapExceeded, "no entry within " + std::to_string(cap) + " steps");
  return t;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double t) const {
  if (sorted_.empty()) return 0.0;
  return static_cast<double>(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

double EmpiricalCdf::left_limit(double t) const {
  if (sorted_.empty()) return 0.0;
  return static_cast<double>(std::lower_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

double EmpiricalCdf::ks_distance(const std::function<double(double)>& cdf) const {
  double d = 0.0;
  const double N = static_cast<double>(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    const double F = cdf(sorted_[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / N - F), std::abs(F - static_cast<double>(i) / N)});
  }
  return d;
}

HtsRts empirical_hts_rts(const MapSystem& system, const Region& region, std::uint64_t samples, std::uint64_t seed,
                         unsigned threads, std::uint64_t cap) {
  if (samples == 0) fail(ErrorCode::TooFewObservations, "no samples");
  const RegionTest test(system, region);
  HtsRts out;
  MonteCarloOptions mc;
  mc.seed = seed ^ 0x5EED;
  out.mu = measure_of_region(system, region, mc).value;
  std::vector<double> h(samples), r(samples);
  parallel_for(samples, threads, [&](std::size_t k) {
    in_trial(k, [&] {
      OrbitState a = sample_orbit_state(system, seed, 2 * k);
      h[k] = static_cast<double>(first_entry(system, test, a, cap)) * out.mu;
      auto rng = make_stream(seed, 2 * k + 1);
      OrbitState b = sample_in_region(system, region, rng);
      r[k] = static_cast<double>(first_entry(system, test, b, cap)) * out.mu;
    });
  });
  out.hts = EmpiricalCdf(std::move(h));
  out.rts = EmpiricalCdf(std::move(r));
  return out;
}

double hts_rts_consistency(const EmpiricalCdf& G, const EmpiricalCdf& Gt) {
  std::vector<double> grid;
  grid.reserve(G.values().size() + Gt.values().size() + 1);
  grid.push_back(0.0);
  grid.insert(grid.end(), G.values().begin(), G.values().end());
  grid.insert(grid.end(), Gt.values().begin(), Gt.values().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double integral = 0.0;
  double worst = 0.0;
  double prev = 0.0;
  for (double t : grid) {
    if (t < 0.0) continue;
    integral += (t - prev) * (1.0 - Gt(prev));
    prev = t;
    worst = std::max({worst, std::abs(G(t) - integral), std::abs(G.left_limit(t) - integral)});
  }
  return worst;
}

KacReport kac_check(const MapSystem& system, const Region& region, std::uint64_t samples, std::uint64_t seed,
                    unsigned threads) {
  if (samples < 2) fail(ErrorCode::TooFewObservations, "need at least two samples");
  const RegionTest test(system, region);
  std::vector<double> ret(samples);
  KacReport rep;
  if (system.analytic_measure()) {
    rep.inverse_measure = 1.0 / measure_of_region(system, region).value;
    parallel_for(samples, threads, [&](std::size_t k) {
      in_trial(k, [&] {
        auto rng = make_stream(seed, k);
        OrbitState st = sample_in_region(system, region, rng);
        ret[k] = static_cast<double>(first_entry(system, test, st));
      });
    });
  } else {
    MonteCarloOptions mc;
    mc.samples = 10'000'000;
    mc.seed = seed ^ 0x4AC;
    rep.inverse_measure = 1.0 / measure_of_region(system, region, mc).value;
    OrbitState st = sample_orbit_state(system, seed, 0);
    first_entry(system, test, st);
    for (std::uint64_t k = 0; k < samples; ++k) ret[k] = static_cast<double>(first_entry(system, test, st));
  }
  double mean = 0.0;
  for (double r : ret) mean += r;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (double r : ret) var += (r - mean) * (r - mean);
  var /= static_cast<double>(samples - 1);
  rep.mean_return = mean;
  rep.mean_se = std::sqrt(var / static_cast<double>(samples));
  rep.relative_deviation = std::abs(mean - rep.inverse_measure) / rep.inverse_measure;
  return rep;
}

}  // namespace repp
