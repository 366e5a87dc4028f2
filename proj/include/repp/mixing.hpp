#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "repp/extremes.hpp"

namespace repp {

enum class KRule { LogSquared, CubeRoot };

/// k_n: floor(log^2 n) by default, floor(n^(1/3)) otherwise (at least 1).
std::uint64_t k_n(std::uint64_t n, KRule rule = KRule::LogSquared);
/// t_n = floor(n^(2/3)).
std::uint64_t t_n(std::uint64_t n);

struct DprimeEstimate {
  std::uint64_t n = 0;
  std::uint64_t kn = 0;
  std::uint64_t jmax = 0;  // floor(n / k_n)
  double value = 0.0;      // S'(n)
  double se = 0.0;
  std::uint64_t samples = 0;
};

/// One draw x ~ mu|U: whether x lies in Q^0 and how many j in [p+1, jmax] have f^j(x) in U.
using DprimeDraw = std::function<std::pair<bool, std::uint64_t>(std::uint64_t sample, std::uint64_t jmax)>;

/// S'(n) = n sum_{j=p+1}^{n/k_n} P(Q^0 and X_j > u) = n mu(U) E_{mu|U}[1_{Q^0} #hits].
DprimeEstimate dprime_core(std::uint64_t n, KRule rule, double mu_ball, std::uint64_t samples,
                           const DprimeDraw& draw, unsigned threads = 1);

DprimeEstimate dprime_sum(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                          std::uint64_t samples, std::uint64_t seed, KRule rule = KRule::LogSquared,
                          unsigned threads = 1);

/// Constraint N([gap + start, gap + end)) == count, in iterations.
struct CountConstraint {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t count = 0;
};

struct EventSpec {
  int kappa1 = 0;  // A = Q^kappa1_{p,0}(u)
  enum class Kind { Counts, Annulus } kind = Kind::Counts;
  std::vector<CountConstraint> counts;  // Kind::Counts
  int annulus_kappa = 0;                // Kind::Annulus: B = f^{-gap} Q^annulus_kappa
};

struct GammaEstimate {
  double gamma = 0.0;
  double se = 0.0;
  double p_a = 0.0;
  double p_b = 0.0;
  double p_b_given_a = 0.0;
  std::uint64_t a_hits = 0;
};

/// gamma = P(A) |P(B|A) - P(B)| with P(A) = mu(U) P_{mu|U}(depth = kappa1).
/// P(B|A) comes from the same conditional draws; P(B) from draws of mu (or,
/// for annulus events, from the conditional depth law by stationarity).
struct GammaDraws {
  /// x ~ mu|U: (depth of x, B evaluated along the orbit of x). For annulus
  /// events B means f^gap(x) has depth annulus_kappa.
  std::function<std::pair<int, bool>(std::uint64_t sample)> conditional;
  /// x ~ mu: B evaluated along the orbit of x (unused for annulus events).
  std::function<bool(std::uint64_t sample)> unconditional;
};

GammaEstimate gamma_core(const EventSpec& event, double mu_ball, std::uint64_t samples, const GammaDraws& draws,
                         unsigned threads = 1);

GammaEstimate estimate_gamma(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                             std::uint64_t gap, const EventSpec& event, std::uint64_t samples, std::uint64_t seed,
                             unsigned threads = 1);

}  // namespace repp
