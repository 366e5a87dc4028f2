#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "repp/geometry.hpp"

namespace repp {

enum class ThresholdMethod { Analytic, EmpiricalQuantile };

/// Links sample length n and target tau to the level u_n. Windows are
/// measured in units of v = 1/mu(U(u_n)) = n/tau iterations, so the expected
/// number of exceedances in [0, t) is t and clusters arrive at rate theta*t.
struct ThresholdSchedule {
  std::uint64_t n = 0;
  double tau = 1.0;
  double u = 0.0;
  double radius = 0.0;
  double v = 0.0;       // iterations per rescaled time unit
  double mu_ball = 0.0;  // mu(U(u_n))
  double mu_se = 0.0;    // Monte Carlo standard error (0 when analytic)
  ThresholdMethod method = ThresholdMethod::Analytic;
  std::uint64_t calibration_length = 0;
};

ThresholdSchedule make_threshold(const MapSystem& system, const Observable& obs, std::uint64_t n, double tau,
                                 ThresholdMethod method = ThresholdMethod::Analytic,
                                 std::uint64_t calibration_length = 10'000'000, std::uint64_t seed = 0);

struct Cluster {
  std::uint64_t start = 0;
  std::uint64_t size = 0;
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusterSeries {
  std::vector<std::uint64_t> times;
  std::vector<int> depths;  // same length as times
  std::vector<Cluster> clusters;
  std::uint64_t window_length = 0;
};

/// Exceedance scanning along one orbit; bit-window tapes and quadratic orbits
/// go through the SIMD kernels.
class OrbitScanner {
 public:
  OrbitScanner(const MapSystem& system, const RegionTest& test);
  /// `st` sits at time t0; appends hit times in [t0, t1) and moves st to t1.
  void run(OrbitState& st, std::uint64_t t0, std::uint64_t t1, std::vector<std::uint64_t>& out) const;
  /// First hit time >= t0 (st at t0), leaving st there; t0 + cap if none.
  std::uint64_t first(OrbitState& st, std::uint64_t t0, std::uint64_t cap) const;

 private:
  const MapSystem& system_;
  const RegionTest& test_;
  std::optional<Arc> arc_;
  bool quadratic_ = false;
};

/// Exceedance times in [0, horizon) with depths; orbit time 0 is `initial`.
/// Depths of late exceedances are resolved by scanning past the horizon.
ClusterSeries scan_exceedances(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                               OrbitState initial, std::uint64_t horizon);
/// Same for many initial states; quadratic orbits run through the batch kernel.
std::vector<ClusterSeries> scan_many(const MapSystem& system, const Observable& obs,
                                     const ThresholdSchedule& schedule, std::vector<OrbitState> initial,
                                     std::uint64_t horizon, unsigned threads = 1);

/// Series from given times; depths follow lag-p chains within the list, and
/// times at or beyond window_length only serve to resolve depths.
ClusterSeries make_series(std::vector<std::uint64_t> times, std::uint64_t window_length, int p);

/// Lag-exactly-p chains: t joins the cluster of t - p when t - p is an exceedance.
void extract_clusters(ClusterSeries& series, int p);

/// Union of disjoint windows [a_j, b_j) in rescaled time.
struct WindowSet {
  std::vector<std::pair<double, double>> parts;
  double mass() const;
  double sup() const;
};

struct ReppCounts {
  std::vector<WindowSet> windows;
  std::vector<std::vector<std::uint64_t>> counts;  // [window][trial]
  std::size_t trials() const { return counts.empty() ? 0 : counts.front().size(); }
};

std::uint64_t build_repp(const ClusterSeries& series, const ThresholdSchedule& schedule, const WindowSet& J);
ReppCounts build_repp(std::span<const ClusterSeries> series, const ThresholdSchedule& schedule,
                      const std::vector<WindowSet>& windows);

struct Ci {
  double lo = 0.0;
  double hi = 0.0;
  bool covers(double v) const { return lo <= v && v <= hi; }
};

struct EIEstimate {
  double theta_ratio = 0.0;
  double theta_cluster = 0.0;
  double theta_runs = 0.0;
  Ci ratio_ci, cluster_ci, runs_ci;
  std::uint64_t exceedances = 0;
  std::uint64_t clusters = 0;
  std::uint64_t n = 0;
  double u = 0.0;
};

constexpr int kBootstrapResamples = 1000;

/// Clusters are (re)extracted from each series with lag p.
EIEstimate estimate_ei(std::span<const ClusterSeries> series, const ThresholdSchedule& schedule, int p,
                       std::uint64_t seed = 0);

/// Empirical cluster-size frequencies; index s holds the count of size s.
std::vector<std::uint64_t> cluster_size_histogram(std::span<const ClusterSeries> series);

struct EvlEstimate {
  double value = 0.0;
  Ci ci;
  std::uint64_t trials = 0;
};

EvlEstimate empirical_evl(const MapSystem& system, const Observable& obs, const ThresholdSchedule& schedule,
                          std::uint64_t trials, std::uint64_t seed, unsigned threads = 1);
EvlEstimate evl_from_series(std::span<const ClusterSeries> series, std::uint64_t n);

constexpr std::uint64_t kDefaultReturnCap = 100'000'000;

/// First j >= 1 with f^j(state) in the region; `state` ends at that point.
std::uint64_t first_entry(const MapSystem& system, const RegionTest& test, OrbitState& state,
                          std::uint64_t cap = kDefaultReturnCap);

class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> values);
  double operator()(double t) const;  // right-continuous
  double left_limit(double t) const;
  const std::vector<double>& values() const { return sorted_; }
  double ks_distance(const std::function<double(double)>& cdf) const;

 private:
  std::vector<double> sorted_;
};

struct HtsRts {
  EmpiricalCdf hts;  // r_U(x) mu(U), x ~ mu
  EmpiricalCdf rts;  // r_U(x) mu(U), x ~ mu restricted to U
  double mu = 0.0;
};

HtsRts empirical_hts_rts(const MapSystem& system, const Region& region, std::uint64_t samples, std::uint64_t seed,
                         unsigned threads = 1, std::uint64_t cap = kDefaultReturnCap);

/// sup_t |G(t) - int_0^t (1 - Gt(s)) ds|, exact for the two step functions.
double hts_rts_consistency(const EmpiricalCdf& G, const EmpiricalCdf& Gt);

struct KacReport {
  double mean_return = 0.0;
  double mean_se = 0.0;
  double inverse_measure = 0.0;
  double relative_deviation = 0.0;
};

/// Analytic measures sample returns from mu restricted to U; otherwise the
/// gaps between successive visits of one long orbit are used, and mu(U) comes
/// from an independent ergodic average.
KacReport kac_check(const MapSystem& system, const Region& region, std::uint64_t samples, std::uint64_t seed,
                    unsigned threads = 1);

}  // namespace repp
