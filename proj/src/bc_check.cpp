#include "repp/bc_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "repp/errors.hpp"

namespace repp {

namespace {

int stable_terms(const std::vector<BcRecord>& recs, double BcRecord::*field, int digits) {
  if (recs.size() < 2) return 0;
  const double final_sum = recs.back().*field;
  const double tol = 0.5 * std::pow(10.0, -digits) * std::abs(final_sum);
  int m = static_cast<int>(recs.size()) - 1;
  while (m > 1 && std::abs(recs[static_cast<std::size_t>(m - 1)].*field - final_sum) <= tol) --m;
  return m;
}

}  // namespace

int BcReport::summable_stable_terms(int digits) const {
  return stable_terms(records, &BcRecord::summable_partial, digits);
}

int BcReport::dens_stable_terms(int digits) const { return stable_terms(records, &BcRecord::dens_partial, digits); }

BcReport check_finite_time(double a, const PeriodicPoint& zeta, int N, double c, double alpha) {
  if (!(a > 1.0 && a <= 2.0)) fail(ErrorCode::InvalidArgument, "a must lie in (1, 2]");
  if (N < 1) fail(ErrorCode::InvalidArgument, "N must be >= 1");
  if (N > 10'000) fail(ErrorCode::PrecisionExhausted, "double precision orbit beyond 10^4 steps is meaningless");
  const MapSystem f = MapSystem::quadratic(a);
  BcReport rep;
  rep.a = a;
  rep.N = N;
  rep.c = c;
  rep.alpha = alpha;
  rep.precision_warning = N > 200;

  std::vector<double> cycle;
  Point z = zeta.zeta;
  for (int j = 0; j < std::max(1, zeta.prime_period); ++j) {
    cycle.push_back(z.x);
    z = apply_map(f, z);
  }
  rep.gamma = std::numeric_limits<double>::infinity();
  for (double y : cycle) rep.gamma = std::min(rep.gamma, std::abs(-1.0 - y));
  rep.N1 = rep.gamma > 0 ? static_cast<int>(std::floor(std::log(4.0 / rep.gamma) / alpha)) + 1 : 0;
  rep.N1 = std::max(rep.N1, 1);

  rep.eg = rep.ba = rep.pa = true;
  double s_sum = 0.0, d_sum = 0.0;
  const double l = kCriticalOrder;
  double deriv = 1.0;  // |Df^n(f(0))|
  double xi = 1.0;     // xi_{n+1}, starting from f(0) = 1
  double xi_n = 0.0;
  for (int n = 0; n <= N; ++n) {
    BcRecord r;
    r.n = n;
    r.derivative = deriv;
    r.xi_abs = std::abs(xi_n);
    const double fn = xi;  // f^n(f(0)) = xi_{n+1}
    r.cycle_distance = std::numeric_limits<double>::infinity();
    for (double y : cycle) r.cycle_distance = std::min(r.cycle_distance, std::abs(xi_n - y));
    if (deriv < std::exp(c * n)) rep.eg = false;
    if (n >= 1) {
      if (r.xi_abs < std::exp(-alpha * n)) rep.ba = false;
      const double need = n <= rep.N1 ? rep.gamma / 4.0 : std::exp(-alpha * n);
      if (r.cycle_distance < need) rep.pa = false;
      s_sum += 1.0 / std::pow(deriv, l);
      d_sum += 1.0 / (std::pow(deriv, l) * std::pow(std::abs(fn - zeta.zeta.x), 1.0 - 1.0 / l));
    }
    r.summable_partial = s_sum;
    r.dens_partial = d_sum;
    rep.records.push_back(r);
    // Advance: xi_{n+1} and |Df^{n+1}(f(0))| = |Df^n(f(0))| |Df(xi_{n+1})|.
    xi_n = xi;
    deriv *= std::abs(2.0 * a * xi);
    xi = 1.0 - a * (xi * xi);
  }
  return rep;
}

}  // namespace repp
