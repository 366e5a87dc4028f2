#include "repp/mixing.hpp"

#include <algorithm>
#include <cmath>

#include "repp/errors.hpp"
#include "repp/parallel.hpp"

namespace repp {

std::uint64_t k_n(std::uint64_t n, KRule rule) {
  const double nd = static_cast<double>(n);
  double k = 1.0;
  if (rule == KRule::LogSquared) {
    const double l = std::log(nd);
    k = std::floor(l * l);
  } else {
    k = std::floor(std::cbrt(nd));
  }
  return static_cast<std::uint64_t>(std::max(1.0, k));
}

std::uint64_t t_n(std::uint64_t n) {
  return static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), 2.0 / 3.0)));
}

DprimeEstimate dprime_core(std::uint64_t n, KRule rule, double mu_ball, std::uint64_t samples,
                           const DprimeDraw& draw, unsigned threads) {
  if (samples < 2) fail(ErrorCode::TooFewObservations, "need at least two samples");
  DprimeEstimate est;
  est.n = n;
  est.kn = k_n(n, rule);
  est.jmax = n / est.kn;
  est.samples = samples;
  std::vector<double> w(samples, 0.0);
  parallel_for(samples, threads, [&](std::size_t k) {
    in_trial(k, [&] {
      const auto [in_q0, hits] = draw(k, est.jmax);
      w[k] = in_q0 ? static_cast<double>(hits) : 0.0;
    });
  });
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples - 1);
  const double scale = static_cast<double>(n) * mu_ball;
  est.value = scale * mean;
  est.se = scale * std::sqrt(var / static_cast<double>(samples));
  return est;
}

DprimeEstimate dprime_sum(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                          std::uint64_t samples, std::uint64_t seed, KRule rule, unsigned threads) {
  const Region U = ball_for_threshold(system, obs, schedule.u);
  const RegionTest test(system, U);
  const OrbitScanner sc(system, test);
  const auto p = static_cast<std::uint64_t>(obs.period());
  const DprimeDraw draw = [&](std::uint64_t k, std::uint64_t jmax) {
    auto rng = make_stream(seed, k, 0xD1);
    OrbitState st = sample_in_region(system, U, rng);
    std::vector<std::uint64_t> hits;
    sc.run(st, 0, jmax + 1, hits);
    const bool in_q0 = !std::binary_search(hits.begin(), hits.end(), p);
    const auto later = static_cast<std::uint64_t>(hits.end() - std::lower_bound(hits.begin(), hits.end(), p + 1));
    return std::pair<bool, std::uint64_t>(in_q0, later);
  };
  return dprime_core(schedule.n, rule, schedule.mu_ball, samples, draw, threads);
}

GammaEstimate gamma_core(const EventSpec& event, double mu_ball, std::uint64_t samples, const GammaDraws& draws,
                         unsigned threads) {
  if (samples < 2) fail(ErrorCode::TooFewObservations, "need at least two samples");
  const bool annulus = event.kind == EventSpec::Kind::Annulus;
  std::vector<int> depth(samples);
  std::vector<char> b_cond(samples), b_free(annulus ? 0 : samples);
  parallel_for(samples, threads, [&](std::size_t k) {
    in_trial(k, [&] {
      const auto [d, b] = draws.conditional(k);
      depth[k] = d;
      b_cond[k] = b ? 1 : 0;
      if (!annulus) b_free[k] = draws.unconditional(k) ? 1 : 0;
    });
  });
  const double N = static_cast<double>(samples);
  double n_a = 0.0, n_ab = 0.0, n_b = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    if (depth[k] == event.kappa1) {
      n_a += 1.0;
      n_ab += b_cond[k];
    }
    n_b += annulus ? (depth[k] == event.annulus_kappa ? 1.0 : 0.0) : b_free[k];
  }
  if (n_a < 10.0) fail(ErrorCode::DegenerateEvent, "annulus event A observed fewer than 10 times");
  if (n_b < 10.0 || (!annulus && N - n_b < 10.0)) {
    fail(ErrorCode::DegenerateEvent, "event B (or its complement) observed fewer than 10 times");
  }
  GammaEstimate est;
  est.a_hits = static_cast<std::uint64_t>(n_a);
  est.p_a = mu_ball * n_a / N;
  est.p_b_given_a = n_ab / n_a;
  const double q = n_b / N;
  est.p_b = annulus ? mu_ball * q : q;
  est.gamma = est.p_a * std::abs(est.p_b_given_a - est.p_b);
  const double var_ba = est.p_b_given_a * (1.0 - est.p_b_given_a) / n_a;
  const double var_b = annulus ? mu_ball * mu_ball * q * (1.0 - q) / N : q * (1.0 - q) / N;
  est.se = est.p_a * std::sqrt(var_ba + var_b);
  return est;
}

GammaEstimate estimate_gamma(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                             std::uint64_t gap, const EventSpec& event, std::uint64_t samples, std::uint64_t seed,
                             unsigned threads) {
  const Region U = ball_for_threshold(system, obs, schedule.u);
  const RegionTest test(system, U);
  const OrbitScanner sc(system, test);
  const int p = obs.period();
  std::uint64_t reach = 0;
  for (const auto& c : event.counts) {
    if (c.end < c.start) fail(ErrorCode::InvalidArgument, "count window end precedes start");
    reach = std::max(reach, gap + c.end);
  }
  const auto eval_counts = [&](OrbitState st) {
    std::vector<std::uint64_t> hits;
    sc.run(st, 0, reach, hits);
    for (const auto& c : event.counts) {
      const auto lo = std::lower_bound(hits.begin(), hits.end(), gap + c.start);
      const auto hi = std::lower_bound(hits.begin(), hits.end(), gap + c.end);
      if (static_cast<std::uint64_t>(hi - lo) != c.count) return false;
    }
    return true;
  };
  GammaDraws draws;
  draws.conditional = [&](std::uint64_t k) {
    auto rng = make_stream(seed, k, 0x6A);
    OrbitState st = sample_in_region(system, U, rng);
    const int d = state_depth(system, test, st, p).value_or(-1);
    bool b = false;
    if (event.kind == EventSpec::Kind::Annulus) {
      advance(system, st, gap);
      b = state_depth(system, test, st, p).value_or(-1) == event.annulus_kappa;
    } else {
      b = eval_counts(std::move(st));
    }
    return std::pair<int, bool>(d, b);
  };
  draws.unconditional = [&](std::uint64_t k) { return eval_counts(sample_orbit_state(system, seed ^ 0x6B6B, k)); };
  return gamma_core(event, schedule.mu_ball, samples, draws, threads);
}

}  // namespace repp
