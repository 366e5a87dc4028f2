#include "repp/dynsys.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "repp/errors.hpp"

namespace repp {

namespace {

constexpr double kEscapeTol = 1e-12;
constexpr double kSingularTol = 1e-12;
constexpr double kBelowOne = 1.0 - 0x1.0p-53;

unsigned tape_base(const MapSystem& s) {
  return s.family == Family::LinearModM ? static_cast<unsigned>(s.m) : 2u;
}

double tape_zero_weight(const MapSystem& s) {
  return s.measure.kind == MeasureKind::BernoulliWeights ? s.measure.alpha : 0.5;
}

double clamp_unit(double y, bool circle) {
  if (y >= 0.0 && y < 1.0) return y;
  if (y < 0.0 && y > -kEscapeTol) return circle ? 0.0 : 0.0;
  if (y >= 1.0 && y < 1.0 + kEscapeTol) return circle ? 0.0 : kBelowOne;
  fail(ErrorCode::DomainEscape, "orbit left [0,1): " + std::to_string(y));
}

double wrap_unit(double y) {
  y -= std::floor(y);
  return y >= 1.0 ? 0.0 : y;
}

bool near_singularity(const MapSystem& s, Point p) {
  switch (s.family) {
    case Family::Quadratic:
      return std::abs(p.x) < kSingularTol;
    case Family::MannevillePomeau:
    case Family::BernoulliDoubling:
      return std::abs(p.x - 0.5) < kSingularTol;
    case Family::CountableBranch: {
      if (p.x < kSingularTol) return true;
      int e = 0;
      std::frexp(p.x, &e);
      return p.x - std::ldexp(1.0, e - 1) < kSingularTol || std::ldexp(1.0, e) - p.x < kSingularTol;
    }
    case Family::LinearModM:
    case Family::TorusLinear:
      return false;
  }
  return false;
}

// Solves x (1 + 2^alpha x^alpha) = y on [0, 1/2].
double mp_left_inverse(double alpha, double y) {
  if (y <= 0.0) return 0.0;
  const double c = std::pow(2.0, alpha);
  double lo = 0.0;
  double hi = 0.5;
  double x = std::min(y, 0.5);
  for (int it = 0; it < 200; ++it) {
    const double h = x * (1.0 + c * std::pow(x, alpha)) - y;
    if (h > 0) hi = x; else lo = x;
    const double dh = 1.0 + c * (1.0 + alpha) * std::pow(x, alpha);
    double next = x - h / dh;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-17 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

Point inverse_branch(const MapSystem& s, std::span<const int> sym, Point y) {
  switch (s.family) {
    case Family::LinearModM:
      if (sym[0] < 0 || sym[0] >= s.m) fail(ErrorCode::InvalidArgument, "symbol outside 0..m-1");
      return (y.x + sym[0]) / s.m;
    case Family::BernoulliDoubling:
      if (sym[0] < 0 || sym[0] > 1) fail(ErrorCode::InvalidArgument, "symbol outside {0,1}");
      return (y.x + sym[0]) / 2.0;
    case Family::CountableBranch:
      if (sym[0] < 1 || sym[0] > 1000) fail(ErrorCode::InvalidArgument, "branch index must be >= 1");
      return std::ldexp(1.0 + y.x, -sym[0]);
    case Family::MannevillePomeau:
      if (sym[0] == 0) return mp_left_inverse(s.alpha, y.x);
      if (sym[0] == 1) return (y.x + 1.0) / 2.0;
      fail(ErrorCode::InvalidArgument, "symbol outside {0,1}");
    case Family::Quadratic: {
      if (sym[0] < 0 || sym[0] > 1) fail(ErrorCode::InvalidArgument, "symbol outside {0,1}");
      const double v = std::max(0.0, (1.0 - y.x) / s.a);
      if (v > 1.0) fail(ErrorCode::InvalidArgument, "inadmissible itinerary for this parameter");
      return sym[0] == 0 ? -std::sqrt(v) : std::sqrt(v);
    }
    case Family::TorusLinear: {
      const auto& m = s.matrix;
      const double det = static_cast<double>(m[0] * m[3] - m[1] * m[2]);
      const double b0 = y.x + sym[0];
      const double b1 = y.y + sym[1];
      const double x0 = (m[3] * b0 - m[1] * b1) / det;
      const double x1 = (-m[2] * b0 + m[0] * b1) / det;
      return Point(wrap_unit(x0), wrap_unit(x1));
    }
  }
  return y;
}

std::uint64_t uniform_below(Xoshiro256& rng, unsigned m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * m) >> 64);
}

}  // namespace

// ---------------------------------------------------------------------------
// MapSystem

MapSystem MapSystem::linear_mod_m(int m) {
  if (m < 2) fail(ErrorCode::InvalidArgument, "LinearModM requires m >= 2");
  MapSystem s;
  s.family = Family::LinearModM;
  s.m = m;
  s.domain = Domain::Circle;
  s.measure = {MeasureKind::Lebesgue, 0.5, 0};
  s.exact_arithmetic = true;
  return s;
}

MapSystem MapSystem::bernoulli_doubling(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  MapSystem s;
  s.family = Family::BernoulliDoubling;
  s.alpha = alpha;
  s.domain = Domain::UnitInterval;
  s.measure = {MeasureKind::BernoulliWeights, alpha, 0};
  s.exact_arithmetic = true;
  return s;
}

MapSystem MapSystem::countable_branch() {
  MapSystem s;
  s.family = Family::CountableBranch;
  s.domain = Domain::UnitInterval;
  s.measure = {MeasureKind::Lebesgue, 0.5, 0};
  s.exact_arithmetic = true;
  return s;
}

MapSystem MapSystem::manneville_pomeau(double alpha, std::size_t burn_in) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  MapSystem s;
  s.family = Family::MannevillePomeau;
  s.alpha = alpha;
  s.domain = Domain::UnitInterval;
  s.measure = {MeasureKind::EmpiricalBurnIn, 0.5, burn_in};
  return s;
}

MapSystem MapSystem::quadratic(double a, std::size_t burn_in) {
  if (!(a > 0.0 && a <= 2.0)) fail(ErrorCode::InvalidArgument, "quadratic parameter must lie in (0,2]");
  MapSystem s;
  s.family = Family::Quadratic;
  s.a = a;
  s.domain = Domain::SymmetricInterval;
  if (a == 2.0) {
    s.measure = {MeasureKind::ArcsineDensity, 0.5, 0};
  } else {
    s.measure = {MeasureKind::EmpiricalBurnIn, 0.5, burn_in};
  }
  return s;
}

MapSystem MapSystem::torus_linear(std::array<std::int64_t, 4> matrix) {
  const double tr = static_cast<double>(matrix[0] + matrix[3]);
  const double det = static_cast<double>(matrix[0] * matrix[3] - matrix[1] * matrix[2]);
  const double disc = tr * tr - 4.0 * det;
  double l1 = 0;
  double l2 = 0;
  if (disc >= 0) {
    l1 = 0.5 * (tr + std::copysign(std::sqrt(disc), tr));
    l2 = det / l1;
  } else {
    l1 = l2 = std::sqrt(det);  // complex pair, equal moduli
  }
  if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
  if (!(std::abs(l2) > 1.0)) {
    fail(ErrorCode::InvalidArgument, "torus matrix must have both eigenvalues of modulus > 1");
  }
  MapSystem s;
  s.family = Family::TorusLinear;
  s.matrix = matrix;
  s.domain = Domain::Torus;
  s.measure = {MeasureKind::Lebesgue, 0.5, 0};
  s.eigenvalues = {l1, l2};
  return s;
}

bool MapSystem::binary_tape() const {
  return exact_arithmetic && tape_base(*this) == 2;
}

std::string MapSystem::name() const {
  switch (family) {
    case Family::LinearModM: return "LinearModM(m=" + std::to_string(m) + ")";
    case Family::BernoulliDoubling: return "BernoulliDoubling(alpha=" + std::to_string(alpha) + ")";
    case Family::CountableBranch: return "CountableBranch";
    case Family::MannevillePomeau: return "MannevillePomeau(alpha=" + std::to_string(alpha) + ")";
    case Family::Quadratic: return "Quadratic(a=" + std::to_string(a) + ")";
    case Family::TorusLinear: return "TorusLinear";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// DigitTape

DigitTape::DigitTape(unsigned base, double zero_weight, Xoshiro256 rng)
    : base_(base), zero_weight_(zero_weight), rng_(rng) {
  if (base < 2 || base > 255) fail(ErrorCode::InvalidArgument, "tape base must lie in 2..255");
  if (base != 2 && zero_weight != 0.5) {
    fail(ErrorCode::InvalidArgument, "biased digits are only supported in base 2");
  }
}

std::size_t DigitTape::size() const {
  return base_ == 2 ? words_.size() * 64 : digits_.size();
}

void DigitTape::ensure(std::size_t digits) {
  if (base_ == 2) {
    const std::size_t need = (digits + 63) / 64 + 1;  // window() reads one word ahead
    while (words_.size() < need) {
      words_.push_back(zero_weight_ == 0.5 ? rng_() : biased_word(rng_, zero_weight_));
    }
  } else {
    while (digits_.size() < digits) {
      digits_.push_back(static_cast<std::uint8_t>(uniform_below(rng_, base_)));
    }
  }
}

unsigned DigitTape::digit(std::size_t i) const {
  if (base_ == 2) return static_cast<unsigned>((words_[i / 64] >> (63 - i % 64)) & 1u);
  return digits_[i];
}

std::uint64_t DigitTape::window(std::size_t pos) const {
  const std::size_t q = pos / 64;
  const unsigned s = pos % 64;
  if (s == 0) return words_[q];
  return (words_[q] << s) | (words_[q + 1] >> (64 - s));
}

std::size_t DigitTape::value_digits() const {
  if (base_ == 2) return 64;
  return static_cast<std::size_t>(std::ceil(64.0 / std::log2(static_cast<double>(base_)))) + 1;
}

double DigitTape::value(std::size_t pos) const {
  if (base_ == 2) return from_fixed(window(pos));
  const std::size_t k = value_digits();
  double v = 0.0;
  for (std::size_t i = k; i-- > 0;) v = (v + digits_[pos + i]) / base_;
  return std::min(v, kBelowOne);
}

void DigitTape::set_prefix(std::uint64_t prefix) {
  if (base_ != 2) fail(ErrorCode::InvalidArgument, "set_prefix requires base 2");
  ensure(64);
  words_[0] = prefix;
}

void DigitTape::set_prefix_digits(std::span<const std::uint8_t> digits) {
  if (base_ == 2) fail(ErrorCode::InvalidArgument, "set_prefix_digits requires base > 2");
  ensure(digits.size());
  std::copy(digits.begin(), digits.end(), digits_.begin());
}

std::uint64_t biased_word(Xoshiro256& rng, double zero_weight) {
  if (zero_weight == 0.5) return rng();
  // Lane i is digit 0 iff U_i < zero_weight; compare U_i bitwise, most
  // significant bit first, stopping once every lane is decided.
  const std::uint64_t a = to_fixed(zero_weight);
  std::uint64_t undecided = ~std::uint64_t{0};
  std::uint64_t below = 0;
  for (int bit = 63; bit >= 0 && undecided != 0; --bit) {
    const std::uint64_t u = rng();
    if ((a >> bit) & 1u) {
      below |= undecided & ~u;
      undecided &= u;
    } else {
      undecided &= ~u;
    }
  }
  return ~below;
}

double bernoulli_cdf_fixed(double alpha, std::uint64_t x) {
  double cdf = 0.0;
  double weight = 1.0;
  for (int bit = 63; bit >= 0; --bit) {
    if ((x >> bit) & 1u) {
      cdf += weight * alpha;
      weight *= 1.0 - alpha;
    } else {
      weight *= alpha;
    }
    if (weight < 1e-300) break;
  }
  return cdf;
}

double bernoulli_cdf(double alpha, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return bernoulli_cdf_fixed(alpha, to_fixed(x));
}

double arcsine_cdf(double x) {
  return 0.5 + std::asin(std::clamp(x, -1.0, 1.0)) / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Floating-point dynamics

Point apply_map(const MapSystem& s, Point p) {
  switch (s.family) {
    case Family::LinearModM: {
      double y = p.x * s.m;
      y -= std::floor(y);
      return clamp_unit(y, true);
    }
    case Family::BernoulliDoubling: {
      double y = 2.0 * p.x;
      if (y >= 1.0) y -= 1.0;
      return clamp_unit(y, false);
    }
    case Family::CountableBranch: {
      if (!(p.x > 0.0)) fail(ErrorCode::DomainEscape, "countable-branch orbit reached 0");
      int e = 0;
      const double f = std::frexp(p.x, &e);  // x = f 2^e, f in [1/2,1), branch k = 1-e
      return clamp_unit(2.0 * f - 1.0, false);
    }
    case Family::MannevillePomeau: {
      double y;
      if (p.x < 0.5) {
        y = p.x * (1.0 + std::pow(2.0, s.alpha) * std::pow(p.x, s.alpha));
      } else {
        y = 2.0 * p.x - 1.0;
      }
      return clamp_unit(y, false);
    }
    case Family::Quadratic: {
      double y = 1.0 - s.a * (p.x * p.x);
      if (y < -1.0) {
        if (y < -1.0 - kEscapeTol) fail(ErrorCode::DomainEscape, "orbit left [-1,1]");
        y = -1.0;
      }
      return y;
    }
    case Family::TorusLinear: {
      const auto& m = s.matrix;
      const double nx = static_cast<double>(m[0]) * p.x + static_cast<double>(m[1]) * p.y;
      const double ny = static_cast<double>(m[2]) * p.x + static_cast<double>(m[3]) * p.y;
      return Point(wrap_unit(nx), wrap_unit(ny));
    }
  }
  return p;
}

double branch_derivative(const MapSystem& s, Point p) {
  switch (s.family) {
    case Family::LinearModM: return static_cast<double>(s.m);
    case Family::BernoulliDoubling: return 2.0;
    case Family::CountableBranch: {
      int e = 0;
      std::frexp(p.x, &e);
      return std::ldexp(1.0, 1 - e);
    }
    case Family::MannevillePomeau:
      if (p.x < 0.5) return 1.0 + std::pow(2.0, s.alpha) * (1.0 + s.alpha) * std::pow(p.x, s.alpha);
      return 2.0;
    case Family::Quadratic: return -2.0 * s.a * p.x;
    case Family::TorusLinear:
      return static_cast<double>(s.matrix[0] * s.matrix[3] - s.matrix[1] * s.matrix[2]);
  }
  return 0.0;
}

double domain_distance(const MapSystem& s, Point a, Point b) {
  switch (s.domain) {
    case Domain::Circle: {
      const double d = std::abs(a.x - b.x);
      return std::min(d, 1.0 - d);
    }
    case Domain::UnitInterval:
    case Domain::SymmetricInterval:
      return std::abs(a.x - b.x);
    case Domain::Torus: {
      const double dx = std::abs(a.x - b.x);
      const double dy = std::abs(a.y - b.y);
      return std::max(std::min(dx, 1.0 - dx), std::min(dy, 1.0 - dy));
    }
  }
  return 0.0;
}

Point wrap_to_domain(const MapSystem& s, Point p) {
  switch (s.domain) {
    case Domain::Circle: return wrap_unit(p.x);
    case Domain::Torus: return Point(wrap_unit(p.x), wrap_unit(p.y));
    case Domain::UnitInterval: return std::clamp(p.x, 0.0, kBelowOne);
    case Domain::SymmetricInterval: return std::clamp(p.x, -1.0, 1.0);
  }
  return p;
}

Point iterate_point(const MapSystem& s, Point x, std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) x = apply_map(s, x);
  return x;
}

// ---------------------------------------------------------------------------
// Orbit states

OrbitState state_from_point(const MapSystem& s, Point x, std::uint64_t tail_seed) {
  OrbitState st;
  if (!s.exact_arithmetic) {
    st.point = x;
    return st;
  }
  DigitTape tape(tape_base(s), tape_zero_weight(s), make_stream(tail_seed, 0x7A11));
  const double v = wrap_to_domain(s, x).x;
  if (tape.base() == 2) {
    tape.set_prefix(to_fixed(v));
  } else {
    std::vector<std::uint8_t> digits(tape.value_digits());
    double y = v;
    for (auto& d : digits) {
      y *= tape.base();
      const double f = std::floor(y);
      d = static_cast<std::uint8_t>(std::clamp(f, 0.0, tape.base() - 1.0));
      y -= f;
    }
    tape.set_prefix_digits(digits);
  }
  st.tape = std::move(tape);
  refresh_point(s, st);
  return st;
}

void refresh_point(const MapSystem& s, OrbitState& st) {
  (void)s;
  if (!st.tape) return;
  st.tape->ensure(st.offset + st.tape->value_digits());
  st.point = st.tape->value(st.offset);
}

void advance(const MapSystem& s, OrbitState& st, std::uint64_t n) {
  if (!st.tape) {
    for (std::uint64_t i = 0; i < n; ++i) st.point = apply_map(s, st.point);
    return;
  }
  if (s.family == Family::CountableBranch) {
    DigitTape& tape = *st.tape;
    for (std::uint64_t i = 0; i < n; ++i) {
      // x in [2^-k, 2^-k+1) reads 0^(k-1) 1 ...; the map deletes those k digits.
      std::size_t zeros = 0;
      for (;;) {
        tape.ensure(st.offset + zeros + 64);
        const std::uint64_t w = tape.window(st.offset + zeros);
        if (w != 0) {
          zeros += static_cast<std::size_t>(std::countl_zero(w));
          break;
        }
        zeros += 64;
        if (zeros > 4096) fail(ErrorCode::DomainEscape, "countable-branch orbit reached 0");
      }
      st.offset += zeros + 1;
    }
  } else {
    st.offset += n;
  }
  refresh_point(s, st);
}

OrbitState iterate(const MapSystem& s, OrbitState st, std::uint64_t n) {
  advance(s, st, n);
  return st;
}

double signed_derivative_along_orbit(const MapSystem& s, Point x, std::uint64_t n) {
  double d = 1.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (near_singularity(s, x)) {
      fail(ErrorCode::NearSingularity, "orbit point within 1e-12 of a critical or discontinuity point");
    }
    d *= branch_derivative(s, x);
    if (i + 1 < n) x = apply_map(s, x);
  }
  return d;
}

double derivative_along_orbit(const MapSystem& s, Point x, std::uint64_t n) {
  return std::abs(signed_derivative_along_orbit(s, x, n));
}

// ---------------------------------------------------------------------------
// Periodic points

namespace {

Point normalize_center(const MapSystem& s, Point z) {
  if (s.domain == Domain::Circle && z.x > 1.0 - 1e-15) z.x = 0.0;
  if (s.domain == Domain::Torus) {
    if (z.x > 1.0 - 1e-15) z.x = 0.0;
    if (z.y > 1.0 - 1e-15) z.y = 0.0;
  }
  return z;
}

PeriodicPoint finish_periodic(const MapSystem& s, Point zeta, int max_period, double tol) {
  PeriodicPoint pp;
  pp.zeta = zeta;
  pp.prime_period = 0;
  Point y = zeta;
  for (int j = 1; j <= max_period; ++j) {
    y = apply_map(s, y);
    if (domain_distance(s, y, zeta) < tol) {
      pp.prime_period = j;
      break;
    }
  }
  if (pp.prime_period == 0) fail(ErrorCode::NoConvergence, "point is not periodic within tolerance");
  pp.signed_multiplier = signed_derivative_along_orbit(s, zeta, static_cast<std::uint64_t>(pp.prime_period));
  pp.multiplier = std::abs(pp.signed_multiplier);
  if (!(pp.multiplier > 1.0 + 1e-9)) fail(ErrorCode::NotRepelling, "multiplier <= 1");
  return pp;
}

// Toral cycles are solved exactly: x_{j+1} = A x_j - k_j closes up when
// (A^p - I) x_0 = sum_j A^(p-1-j) k_j.
PeriodicPoint torus_periodic_point(const MapSystem& s, std::span<const int> itinerary, std::size_t p, double tol) {
  using Mat = std::array<long double, 4>;
  const auto mul = [](const Mat& a, const Mat& b) {
    return Mat{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
               a[2] * b[1] + a[3] * b[3]};
  };
  const Mat A{static_cast<long double>(s.matrix[0]), static_cast<long double>(s.matrix[1]),
              static_cast<long double>(s.matrix[2]), static_cast<long double>(s.matrix[3])};
  Mat Ap{1, 0, 0, 1};
  long double rx = 0, ry = 0;
  for (std::size_t j = 0; j < p; ++j) {
    // r <- A r + k_j accumulates sum A^(p-1-j) k_j.
    const long double nx = A[0] * rx + A[1] * ry + itinerary[2 * j];
    const long double ny = A[2] * rx + A[3] * ry + itinerary[2 * j + 1];
    rx = nx;
    ry = ny;
    Ap = mul(Ap, A);
  }
  const Mat M{Ap[0] - 1, Ap[1], Ap[2], Ap[3] - 1};
  const long double det = M[0] * M[3] - M[1] * M[2];
  if (det == 0) fail(ErrorCode::NoConvergence, "A^p - I is singular");
  const long double x0 = (M[3] * rx - M[1] * ry) / det;
  const long double y0 = (-M[2] * rx + M[0] * ry) / det;
  const auto wrap = [](long double v) {
    v -= std::floor(v);
    return static_cast<double>(v >= 1 ? 0 : v);
  };
  const Point x = normalize_center(s, Point(wrap(x0), wrap(y0)));
  const double err = domain_distance(s, iterate_point(s, x, p), x);
  if (!(err < tol)) fail(ErrorCode::NoConvergence, "|f^p(zeta) - zeta| exceeds tolerance");
  return finish_periodic(s, x, static_cast<int>(p), 1e-8);
}

}  // namespace

PeriodicPoint find_periodic_point(const MapSystem& s, std::span<const int> itinerary, double tol) {
  const std::size_t width = s.family == Family::TorusLinear ? 2 : 1;
  if (itinerary.empty() || itinerary.size() % width != 0) {
    fail(ErrorCode::InvalidArgument, "itinerary must be non-empty (two symbols per step on the torus)");
  }
  const std::size_t p = itinerary.size() / width;
  if (s.family == Family::TorusLinear) return torus_periodic_point(s, itinerary, p, tol);
  Point x = s.domain == Domain::SymmetricInterval ? Point(0.5) : Point(0.5, 0.5);
  // The composed inverse branch is a contraction; iterate until the step
  // vanishes or stops shrinking at rounding level.
  bool converged = false;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10'000; ++it) {
    Point y = x;
    for (std::size_t k = p; k-- > 0;) y = inverse_branch(s, itinerary.subspan(k * width, width), y);
    const double d = domain_distance(s, x, y);
    x = y;
    if (d == 0.0 || (d <= 1e-15 && d >= prev)) {
      converged = true;
      break;
    }
    prev = d;
  }
  if (!converged) fail(ErrorCode::NoConvergence, "inverse-branch iteration did not converge");
  x = normalize_center(s, x);
  const double err = domain_distance(s, iterate_point(s, x, p), x);
  if (!(err < tol)) fail(ErrorCode::NoConvergence, "|f^p(zeta) - zeta| exceeds tolerance");
  return finish_periodic(s, x, static_cast<int>(p), 1e-8);
}

PeriodicPoint periodic_point_at(const MapSystem& s, Point zeta, int max_period) {
  return finish_periodic(s, normalize_center(s, zeta), max_period, 1e-10);
}

// ---------------------------------------------------------------------------
// Sampling

Point draw_point(const MapSystem& s, Xoshiro256& rng) {
  switch (s.measure.kind) {
    case MeasureKind::Lebesgue:
      if (s.domain == Domain::Torus) {
        const double u = uniform01(rng);
        return Point(u, uniform01(rng));
      }
      if (s.domain == Domain::SymmetricInterval) return 2.0 * uniform01(rng) - 1.0;
      return uniform01(rng);
    case MeasureKind::BernoulliWeights:
      return from_fixed(biased_word(rng, s.measure.alpha));
    case MeasureKind::ArcsineDensity:
      return std::sin(std::numbers::pi * (uniform01(rng) - 0.5));
    case MeasureKind::EmpiricalBurnIn: {
      Point x;
      if (s.domain == Domain::Torus) {
        const double u = uniform01(rng);
        x = Point(u, uniform01(rng));
      } else if (s.domain == Domain::SymmetricInterval) {
        x = 2.0 * uniform01(rng) - 1.0;
      } else {
        x = uniform01(rng);
      }
      return iterate_point(s, x, s.measure.burn_in_steps);
    }
  }
  return {};
}

std::vector<Point> sample_initial_conditions(const MapSystem& s, std::size_t count, std::uint64_t seed) {
  if (count == 0) fail(ErrorCode::InvalidArgument, "count must be >= 1");
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = make_stream(seed, i);
    out.push_back(draw_point(s, rng));
  }
  return out;
}

OrbitState sample_orbit_state(const MapSystem& s, std::uint64_t seed, std::uint64_t stream) {
  auto rng = make_stream(seed, stream);
  OrbitState st;
  if (s.exact_arithmetic) {
    st.tape.emplace(tape_base(s), tape_zero_weight(s), rng);
    refresh_point(s, st);
  } else {
    st.point = draw_point(s, rng);
  }
  return st;
}

}  // namespace repp
