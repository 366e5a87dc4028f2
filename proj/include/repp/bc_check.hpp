#pragma once

#include <vector>

#include "repp/dynsys.hpp"

namespace repp {

/// Per-step values along the critical orbit xi_n = f_a^n(0).
struct BcRecord {
  int n = 0;
  double derivative = 0.0;     // |Df_a^n(f_a(0))|
  double xi_abs = 0.0;         // |f_a^n(0)|
  double cycle_distance = 0.0;  // min_j |xi_n - f_a^j(zeta)|
  double summable_partial = 0.0;
  double dens_partial = 0.0;
};

struct BcReport {
  double a = 2.0;
  int N = 0;
  double c = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;  // min_j |-1 - f_a^j(zeta)|
  int N1 = 0;          // e^{-alpha n} < gamma/4 for every n >= N1
  bool eg = false;
  bool ba = false;
  bool pa = false;
  bool precision_warning = false;  // N > 200: late orbit values are unreliable
  std::vector<BcRecord> records;   // n = 0..N (n = 0 carries no BA/PA data)

  /// Smallest m such that every partial sum from m terms on agrees with the
  /// N-term sum to `digits` significant digits.
  int summable_stable_terms(int digits = 6) const;
  int dens_stable_terms(int digits = 6) const;
};

constexpr int kCriticalOrder = 2;

/// Finite-time growth (EG), basic (BA) and periodic (PA) assumptions for
/// f_a(x) = 1 - a x^2 along with partial sums of the two summability series.
BcReport check_finite_time(double a, const PeriodicPoint& zeta, int N, double c, double alpha);

}  // namespace repp
