#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "repp/extremes.hpp"

namespace repp {

/// First-return system on a base set; f^ = f^R with R the first return time.
struct InducedSystem {
  MapSystem base;
  Region base_set;
  bool whole_space = false;
  double mu_base = 1.0;  // mu(base_set)
  double mu_base_se = 0.0;
  double kac_constant = 1.0;  // 1 / mu(base_set)
  std::uint64_t return_cap = 100'000'000;
  std::uint64_t burn_in_returns = 1000;
};

/// nullopt base set means the whole space.
InducedSystem make_induced(const MapSystem& system, std::optional<Region> base_set, const MonteCarloOptions& mc = {},
                           std::uint64_t burn_in_returns = 1000);

struct FirstReturn {
  std::uint64_t time = 0;
  OrbitState landing;
};

FirstReturn first_return(const InducedSystem& induced, OrbitState x);
FirstReturn first_return(const MapSystem& system, const Region& base_set, Point x,
                         std::uint64_t cap = kDefaultReturnCap);

/// Number of f^-steps in the cycle of zeta (visits of the cycle to the base).
int induced_period(const InducedSystem& induced, const PeriodicPoint& pp);

/// Draw from mu^ = mu restricted to the base: exact for analytic measures,
/// otherwise uniform on the base followed by burn_in_returns returns.
OrbitState sample_induced(const InducedSystem& induced, std::uint64_t seed, std::uint64_t stream);

/// Same ball and tau: n^ = round(n mu(base)), v^ = 1 / P(U | base).
ThresholdSchedule induced_schedule(const InducedSystem& induced, const ThresholdSchedule& original);

/// Exceedances of phi along the f^-orbit of `start`, clustered at lag p_hat.
ClusterSeries induced_process(const InducedSystem& induced, const Observable& obs, const ThresholdSchedule& schedule,
                              OrbitState start, std::uint64_t horizon, int p_hat);

struct ReppComparison {
  std::vector<double> tv;  // per window
  double threshold = 0.05;
  bool pass = false;
};

ReppComparison compare_repp(const ReppCounts& original, double tau_original, const ReppCounts& induced,
                            double tau_induced, double threshold = 0.05);

struct InducedDiagnostics {
  double mean_return = 0.0;
  double mean_return_se = 0.0;
  double kac_constant = 0.0;
  double min_derivative = 0.0;  // min |Df^| over the samples
};

InducedDiagnostics induced_diagnostics(const InducedSystem& induced, std::uint64_t samples, std::uint64_t seed);

}  // namespace repp
