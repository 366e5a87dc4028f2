#include "repp/cpdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "repp/errors.hpp"
#include "repp/rng.hpp"

namespace repp {

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

std::vector<double> histogram(std::span<const std::uint64_t> counts, std::size_t size) {
  std::vector<double> h(size, 0.0);
  for (auto c : counts) {
    if (c >= h.size()) h.resize(c + 1, 0.0);
    h[c] += 1.0;
  }
  return h;
}

}  // namespace

PolyaAeppli::PolyaAeppli(double theta_, double t_) : theta(theta_), t(t_) {
  if (!(theta > 0.0 && theta <= 1.0)) fail(ErrorCode::InvalidArgument, "theta must lie in (0,1]");
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "t must be >= 0");
}

double poisson_pmf(double mean, std::uint64_t k) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(-mean + kd * std::log(mean) - std::lgamma(kd + 1));
}

double pa_pmf(double theta, double t, std::uint64_t k) {
  if (theta == 1.0) return poisson_pmf(t, k);
  const double lam = theta * t;
  if (k == 0) return std::exp(-lam);
  if (t == 0.0) return 0.0;
  // Log-sum-exp over the number j of clusters.
  const double lt = std::log(theta);
  const double l1t = std::log1p(-theta);
  const double llam = std::log(lam);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(k);
  for (std::uint64_t j = 1; j <= k; ++j) {
    const double jd = static_cast<double>(j);
    const double v = jd * lt + static_cast<double>(k - j) * l1t + jd * llam - std::lgamma(jd + 1) +
                     log_choose(k - 1, j - 1);
    terms[j - 1] = v;
    top = std::max(top, v);
  }
  double sum = 0.0;
  for (double v : terms) sum += std::exp(v - top);
  return std::exp(-lam + top + std::log(sum));
}

double PolyaAeppli::pmf(std::uint64_t k) const { return pa_pmf(theta, t, k); }

std::vector<double> PolyaAeppli::pmf_table(std::uint64_t K) const {
  std::vector<double> out(K + 1);
  for (std::uint64_t k = 0; k <= K; ++k) out[k] = pmf(k);
  return out;
}

double PolyaAeppli::cdf(std::uint64_t k) const {
  double c = 0.0;
  for (std::uint64_t i = 0; i <= k; ++i) c += pmf(i);
  return std::min(c, 1.0);
}

std::uint64_t PolyaAeppli::support_bound(double eps) const {
  double acc = 0.0;
  std::uint64_t k = 0;
  // Safety cap: many mean cluster counts plus a long geometric tail.
  const double tail = theta < 1.0 ? std::log(eps) / std::log1p(-theta) : 0.0;
  const auto floor_k = static_cast<std::uint64_t>(std::ceil(t / theta) * 20 + 2 * tail) + 20;
  for (;; ++k) {
    acc += pmf(k);
    if (k >= static_cast<std::uint64_t>(t / theta) && 1.0 - acc < eps) break;
    if (k > floor_k) break;
  }
  return k;
}

double PolyaAeppli::laplace(double y) const {
  const double mass[1] = {t};
  const double ys[1] = {y};
  return cp_laplace(theta, mass, ys);
}

std::vector<std::uint64_t> pa_sample(const PolyaAeppli& model, std::uint64_t trials, std::uint64_t seed) {
  std::vector<std::uint64_t> out(trials);
  for (std::uint64_t i = 0; i < trials; ++i) {
    auto rng = make_stream(seed, i);
    std::poisson_distribution<std::uint64_t> arrivals(model.theta * model.t);
    const std::uint64_t K = model.t > 0 ? arrivals(rng) : 0;
    std::uint64_t total = K;
    if (model.theta < 1.0) {
      std::geometric_distribution<std::uint64_t> extra(model.theta);
      for (std::uint64_t c = 0; c < K; ++c) total += extra(rng);
    }
    out[i] = total;
  }
  return out;
}

double multiplicity_pmf(double theta, std::uint64_t size) {
  if (size == 0) fail(ErrorCode::SizeZero, "cluster sizes start at 1");
  if (!(theta > 0.0 && theta <= 1.0)) fail(ErrorCode::InvalidArgument, "theta must lie in (0,1]");
  return theta * std::pow(1.0 - theta, static_cast<double>(size - 1));
}

double multiplicity_laplace(double theta, double y) {
  const double e = std::exp(-y);
  return theta * e / (1.0 - (1.0 - theta) * e);
}

double cp_laplace(double theta, std::span<const double> masses, std::span<const double> y) {
  if (masses.size() != y.size()) fail(ErrorCode::InvalidArgument, "one y per window");
  double s = 0.0;
  for (std::size_t l = 0; l < masses.size(); ++l) {
    if (y[l] < 0.0) fail(ErrorCode::InvalidArgument, "y must be >= 0");
    s += (1.0 - multiplicity_laplace(theta, y[l])) * masses[l];
  }
  return std::exp(-theta * s);
}

GofReport gof(std::span<const std::uint64_t> counts, const PolyaAeppli& model) {
  if (counts.size() < 200) fail(ErrorCode::TooFewObservations, "need at least 200 observations");
  GofReport rep;
  rep.observations = counts.size();
  const double N = static_cast<double>(counts.size());
  const std::uint64_t K = std::max<std::uint64_t>(model.support_bound(), *std::max_element(counts.begin(), counts.end()));
  const std::vector<double> pmf = model.pmf_table(K);
  const std::vector<double> obs = histogram(counts, K + 1);
  double tv = 0.0;
  double covered = 0.0;
  for (std::uint64_t k = 0; k <= K; ++k) {
    tv += std::abs(obs[k] / N - pmf[k]);
    covered += pmf[k];
  }
  tv += std::max(0.0, 1.0 - covered);
  rep.total_variation = 0.5 * tv;

  // Bins [edge_i, edge_{i+1}); the last bin is open-ended.
  std::vector<double> exp_bins, obs_bins;
  double e = 0.0, o = 0.0;
  double cum = 0.0;
  for (std::uint64_t k = 0; k <= K; ++k) {
    e += N * pmf[k];
    o += obs[k];
    cum += pmf[k];
    if (e >= 5.0 && N * (1.0 - cum) >= 5.0) {
      exp_bins.push_back(e);
      obs_bins.push_back(o);
      e = o = 0.0;
    }
  }
  // Everything left, including mass beyond K, forms the tail bin.
  e += N * std::max(0.0, 1.0 - cum);
  if (exp_bins.empty() || e >= 5.0) {
    exp_bins.push_back(e);
    obs_bins.push_back(o);
  } else {
    exp_bins.back() += e;
    obs_bins.back() += o;
  }
  double chi = 0.0;
  for (std::size_t i = 0; i < exp_bins.size(); ++i) {
    if (exp_bins[i] > 0) chi += (obs_bins[i] - exp_bins[i]) * (obs_bins[i] - exp_bins[i]) / exp_bins[i];
  }
  rep.chi_square = chi;
  rep.dof = static_cast<int>(exp_bins.size()) - 1;
  rep.p_value = rep.dof > 0 ? boost::math::gamma_q(0.5 * rep.dof, 0.5 * chi) : 1.0;
  return rep;
}

double empirical_tv(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::TooFewObservations, "empty sample");
  std::vector<double> ha = histogram(a, 1), hb = histogram(b, 1);
  const std::size_t n = std::max(ha.size(), hb.size());
  ha.resize(n, 0.0);
  hb.resize(n, 0.0);
  double tv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    tv += std::abs(ha[k] / static_cast<double>(a.size()) - hb[k] / static_cast<double>(b.size()));
  }
  return 0.5 * tv;
}

}  // namespace repp
