#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repp/rng.hpp"

namespace repp {

enum class Family {
  LinearModM,
  BernoulliDoubling,
  CountableBranch,
  MannevillePomeau,
  Quadratic,
  TorusLinear,
};

enum class Domain {
  Circle,             // [0,1) with 0 ~ 1
  UnitInterval,       // [0,1)
  SymmetricInterval,  // [-1,1]
  Torus,              // [0,1)^2 with wrap-around in both coordinates
};

enum class MeasureKind { Lebesgue, BernoulliWeights, ArcsineDensity, EmpiricalBurnIn };

struct Measure {
  MeasureKind kind = MeasureKind::Lebesgue;
  double alpha = 0.5;               // weight of digit 0 for BernoulliWeights
  std::size_t burn_in_steps = 0;    // EmpiricalBurnIn only
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  Point() = default;
  Point(double x_) : x(x_) {}  // NOLINT: 1-D points convert implicitly
  Point(double x_, double y_) : x(x_), y(y_) {}
  friend bool operator==(const Point&, const Point&) = default;
};

struct MapSystem {
  Family family = Family::LinearModM;
  int m = 2;
  double alpha = 0.5;  // BernoulliDoubling weight or MannevillePomeau exponent
  double a = 2.0;      // Quadratic parameter
  std::array<std::int64_t, 4> matrix{3, 1, 1, 2};  // row-major
  Domain domain = Domain::Circle;
  Measure measure{};
  bool exact_arithmetic = false;
  std::array<double, 2> eigenvalues{};  // TorusLinear only, |lambda_1| >= |lambda_2|

  static MapSystem linear_mod_m(int m);
  static MapSystem bernoulli_doubling(double alpha);
  static MapSystem countable_branch();
  static MapSystem manneville_pomeau(double alpha, std::size_t burn_in = 10'000);
  /// a = 2 carries the arcsine density; other a fall back to EmpiricalBurnIn.
  static MapSystem quadratic(double a, std::size_t burn_in = 10'000);
  static MapSystem torus_linear(std::array<std::int64_t, 4> matrix = {3, 1, 1, 2});

  int dimension() const { return family == Family::TorusLinear ? 2 : 1; }
  bool analytic_measure() const { return measure.kind != MeasureKind::EmpiricalBurnIn; }
  /// Binary digit tapes back the orbit (shift semantics).
  bool binary_tape() const;
  std::string name() const;
};

/// Digits of a point in base m, generated lazily from the measure. Digit i is
/// the (i+1)-th digit after the radix point of the tape's starting point.
class DigitTape {
 public:
  DigitTape(unsigned base, double zero_weight, Xoshiro256 rng);

  unsigned base() const { return base_; }
  double zero_weight() const { return zero_weight_; }
  std::size_t size() const;
  void ensure(std::size_t digits);

  unsigned digit(std::size_t i) const;
  /// 64 binary digits starting at pos as a 0.64 fixed-point number (base 2).
  std::uint64_t window(std::size_t pos) const;
  double value(std::size_t pos) const;
  std::span<const std::uint64_t> words() const { return words_; }
  /// Overwrites the leading 64 binary digits.
  void set_prefix(std::uint64_t prefix);
  /// Overwrites leading base-m digits.
  void set_prefix_digits(std::span<const std::uint8_t> digits);

  /// Digits needed to resolve a point to 2^-64.
  std::size_t value_digits() const;

 private:
  unsigned base_;
  double zero_weight_;
  Xoshiro256 rng_;
  std::vector<std::uint64_t> words_;   // base 2, most significant bit first
  std::vector<std::uint8_t> digits_;   // base > 2
};

struct OrbitState {
  Point point;
  std::optional<DigitTape> tape;
  std::size_t offset = 0;  // tape position of `point`
};

struct PeriodicPoint {
  Point zeta;
  int prime_period = 1;
  double multiplier = 0.0;         // |Df^p(zeta)| or |det Df^p(zeta)|
  double signed_multiplier = 0.0;  // Df^p(zeta) in 1-D; det in 2-D
};

/// One application of the floating-point map; clamps escapes below 1e-12.
Point apply_map(const MapSystem& system, Point x);
/// Signed branch derivative (determinant for the torus).
double branch_derivative(const MapSystem& system, Point x);

/// Metric of the system's domain (wrap-around on the circle and torus; sup
/// norm on the torus).
double domain_distance(const MapSystem& system, Point a, Point b);
Point wrap_to_domain(const MapSystem& system, Point x);

/// Builds an orbit state at x. Exact families get a tape whose first 64 binary
/// digits are x and whose remaining digits are drawn from `tail_seed`.
OrbitState state_from_point(const MapSystem& system, Point x, std::uint64_t tail_seed = 0);
void refresh_point(const MapSystem& system, OrbitState& state);
void advance(const MapSystem& system, OrbitState& state, std::uint64_t n);
OrbitState iterate(const MapSystem& system, OrbitState state, std::uint64_t n);
Point iterate_point(const MapSystem& system, Point x, std::uint64_t n);

double derivative_along_orbit(const MapSystem& system, Point x, std::uint64_t n);
double signed_derivative_along_orbit(const MapSystem& system, Point x, std::uint64_t n);

/// Torus itineraries use two symbols per step (integer translations k1, k2).
PeriodicPoint find_periodic_point(const MapSystem& system, std::span<const int> itinerary,
                                  double tol = 1e-12);
/// Period and multiplier for an explicitly given point (tolerance 1e-10).
PeriodicPoint periodic_point_at(const MapSystem& system, Point zeta, int max_period = 64);

Point draw_point(const MapSystem& system, Xoshiro256& rng);
std::vector<Point> sample_initial_conditions(const MapSystem& system, std::size_t count,
                                             std::uint64_t seed);
/// One draw from the invariant measure as an orbit state. Stream `stream` of
/// `seed` is used, so draws are reproducible in isolation.
OrbitState sample_orbit_state(const MapSystem& system, std::uint64_t seed, std::uint64_t stream);

/// 64 i.i.d. binary digits, each 0 with probability `zero_weight`.
std::uint64_t biased_word(Xoshiro256& rng, double zero_weight);

/// CDF of the (alpha, 1-alpha)-Bernoulli measure on [0,1).
double bernoulli_cdf(double alpha, double x);
double bernoulli_cdf_fixed(double alpha, std::uint64_t x);
double arcsine_cdf(double x);

inline std::uint64_t to_fixed(double x) {
  if (x <= 0.0) return 0;
  if (x >= 1.0) return ~std::uint64_t{0};
  return static_cast<std::uint64_t>(x * 0x1.0p64);
}
/// Truncates to 53 bits so the result stays below 1.
inline double from_fixed(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

}  // namespace repp
