#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace repp {

/// Law of N([0,t)) for Poisson(theta t) clusters with sizes s >= 1 drawn from
/// theta (1-theta)^(s-1). The mean count is t.
struct PolyaAeppli {
  double theta = 1.0;
  double t = 1.0;

  PolyaAeppli(double theta_, double t_);

  double pmf(std::uint64_t k) const;
  double cdf(std::uint64_t k) const;
  /// pmf(0..K) in one pass.
  std::vector<double> pmf_table(std::uint64_t K) const;
  double mean() const { return t; }
  double variance() const { return t * (2.0 - theta) / theta; }
  /// Smallest K with the tail beyond K below `eps`.
  std::uint64_t support_bound(double eps = 1e-12) const;
  /// E[e^{-y N}].
  double laplace(double y) const;
};

double poisson_pmf(double mean, std::uint64_t k);
double pa_pmf(double theta, double t, std::uint64_t k);

/// Deterministic in (seed, trial): trial i uses stream i of seed.
std::vector<std::uint64_t> pa_sample(const PolyaAeppli& model, std::uint64_t trials, std::uint64_t seed);

/// theta (1-theta)^(size-1); size 0 is rejected with SizeZero.
double multiplicity_pmf(double theta, std::uint64_t size);
/// Generating function sum_s e^{-ys} theta (1-theta)^(s-1).
double multiplicity_laplace(double theta, double y);

/// exp(-theta sum_l (1 - phi(y_l)) |I_l|) for disjoint windows of mass |I_l|.
double cp_laplace(double theta, std::span<const double> masses, std::span<const double> y);

struct GofReport {
  double total_variation = 0.0;
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::uint64_t observations = 0;
};

/// TV against the pmf and Pearson chi-square with bins pooled to expected >= 5.
GofReport gof(std::span<const std::uint64_t> counts, const PolyaAeppli& model);

/// Total variation between two empirical count samples.
double empirical_tv(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

}  // namespace repp
