#include "repp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "repp/errors.hpp"

namespace repp {

namespace {

bool in_union(const std::vector<Interval>& parts, double v) {
  for (const auto& iv : parts) {
    if (iv.contains(v)) return true;
  }
  return false;
}

std::vector<Interval> circle_parts(double center, double left, double right) {
  if (left + right >= 1.0) return {{0.0, 1.0, true}};
  const double lo = center - left;
  const double hi = center + right;
  if (lo < 0.0) return {{0.0, hi, true}, {1.0 + lo, 1.0}};
  if (hi > 1.0) return {{0.0, hi - 1.0, true}, {lo, 1.0}};
  return {{lo, hi, lo == 0.0}};
}

double union_length(const std::vector<Interval>& parts) {
  double t = 0.0;
  for (const auto& iv : parts) t += iv.length();
  return t;
}

// Measure-fraction of the fixed-point interval [lo, hi) inside the cylinder
// [start, start + 2^bits), relative to the cylinder.
double cylinder_fraction(double alpha, std::uint64_t start, int bits, unsigned __int128 lo,
                         unsigned __int128 hi) {
  const unsigned __int128 s = start;
  const unsigned __int128 e = s + (static_cast<unsigned __int128>(1) << bits);
  const auto rel = [&](unsigned __int128 z) -> double {
    if (z <= s) return 0.0;
    if (z >= e) return 1.0;
    const std::uint64_t off = static_cast<std::uint64_t>(z - s);
    return bernoulli_cdf_fixed(alpha, bits == 64 ? off : off << (64 - bits));
  };
  return rel(hi) - rel(lo);
}

// Digit-by-digit draw of a 0.64 fixed-point number in [lo, hi) from the
// (alpha, 1-alpha)-Bernoulli measure restricted to that interval.
std::uint64_t sample_fixed(double alpha, unsigned __int128 lo, unsigned __int128 hi, Xoshiro256& rng) {
  std::uint64_t prefix = 0;
  for (int d = 0; d < 64; ++d) {
    const int child_bits = 63 - d;
    const std::uint64_t c0 = prefix;
    const std::uint64_t c1 = prefix | (std::uint64_t{1} << child_bits);
    const double f0 = cylinder_fraction(alpha, c0, child_bits, lo, hi);
    const double f1 = cylinder_fraction(alpha, c1, child_bits, lo, hi);
    if (f0 == 1.0 && f1 == 1.0) {
      // Whole cylinder inside: remaining digits are unconditioned.
      const std::uint64_t tail = biased_word(rng, alpha);
      const std::uint64_t mask = (child_bits == 63) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (child_bits + 1)) - 1);
      return prefix | (tail & mask);
    }
    const double m0 = alpha * f0;
    const double m1 = (1.0 - alpha) * f1;
    if (m0 + m1 <= 0.0) fail(ErrorCode::InvalidArgument, "region has zero measure");
    if (uniform01(rng) * (m0 + m1) >= m0) prefix = c1;
  }
  return prefix;
}

}  // namespace

// ---------------------------------------------------------------------------

bool Region::contains(Point p) const {
  if (!in_union(x, p.x)) return false;
  return y.empty() || in_union(y, p.y);
}

Arc to_arc(const Region& r) {
  if (!r.y.empty()) fail(ErrorCode::InvalidArgument, "torus regions have no arc form");
  if (r.x.size() == 1) {
    const std::uint64_t lo = to_fixed(r.x[0].lo);
    const std::uint64_t hi = r.x[0].hi >= 1.0 ? 0 : to_fixed(r.x[0].hi);
    if (r.x[0].lo <= 0.0 && r.x[0].hi >= 1.0) return {0, ~std::uint64_t{0}};
    return {lo, hi - lo};
  }
  if (r.x.size() == 2) {
    const Interval& a = r.x[0].lo == 0.0 ? r.x[0] : r.x[1];
    const Interval& b = r.x[0].lo == 0.0 ? r.x[1] : r.x[0];
    if (a.lo == 0.0 && b.hi >= 1.0) {
      const std::uint64_t lo = to_fixed(b.lo);
      return {lo, to_fixed(a.hi) - lo};
    }
  }
  fail(ErrorCode::InvalidArgument, "region is not a single arc");
}

// ---------------------------------------------------------------------------
// Observable

Observable Observable::periodic(const PeriodicPoint& pp, Shape shape) {
  Observable o;
  o.center = pp;
  o.shape = shape;
  return o;
}

Observable Observable::aperiodic(Point zeta, Shape shape) {
  Observable o;
  o.center.zeta = zeta;
  o.center.prime_period = 0;
  o.center.multiplier = std::numeric_limits<double>::infinity();
  o.shape = shape;
  return o;
}

double Observable::g(double d) const {
  switch (shape) {
    case Shape::NegLog: return d > 0 ? -std::log(d) : std::numeric_limits<double>::infinity();
    case Shape::PowerLaw: return d > 0 ? std::pow(d, -1.0 / s) : std::numeric_limits<double>::infinity();
    case Shape::Bounded: return D - std::pow(d, 1.0 / s);
  }
  return 0.0;
}

double Observable::radius_for_level(double u) const {
  double r = std::numeric_limits<double>::quiet_NaN();
  switch (shape) {
    case Shape::NegLog: r = std::exp(-u); break;
    case Shape::PowerLaw: if (u > 0) r = std::pow(u, -s); break;
    case Shape::Bounded: if (u < D) r = std::pow(D - u, s); break;
  }
  if (!(r > 0.0 && r < 1.0)) fail(ErrorCode::LevelOutOfRange, "g^{-1}(u) undefined for u=" + std::to_string(u));
  return r;
}

double Observable::upper_endpoint() const {
  return shape == Shape::Bounded ? D : std::numeric_limits<double>::infinity();
}

double Observable::operator()(const MapSystem& system, Point x) const {
  return g(domain_distance(system, x, center.zeta));
}

// ---------------------------------------------------------------------------
// Balls

Region ball(const MapSystem& system, Point zeta, double left, double right) {
  Region r;
  switch (system.domain) {
    case Domain::Circle:
      r.x = circle_parts(zeta.x, left, right);
      break;
    case Domain::UnitInterval:
      r.x = {{std::max(0.0, zeta.x - left), std::min(1.0, zeta.x + right)}};
      r.x[0].closed_lo = r.x[0].lo == 0.0;
      break;
    case Domain::SymmetricInterval:
      r.x = {{std::max(-1.0, zeta.x - left), std::min(1.0, zeta.x + right)}};
      r.x[0].closed_lo = r.x[0].lo == -1.0;
      break;
    case Domain::Torus:
      r.x = circle_parts(zeta.x, left, right);
      r.y = circle_parts(zeta.y, left, right);
      break;
  }
  return r;
}

Region ball_for_threshold(const MapSystem& system, const Observable& obs, double u) {
  const double r = obs.radius_for_level(u);
  return ball(system, obs.center.zeta, r, r);
}

RegionTest::RegionTest(const MapSystem& system, Region region) : region_(std::move(region)) {
  if (system.binary_tape()) arc_ = to_arc(region_);
}

bool RegionTest::contains(const OrbitState& st) const {
  if (arc_ && st.tape) return arc_->contains(st.tape->window(st.offset));
  return region_.contains(st.point);
}

// ---------------------------------------------------------------------------
// Nested balls

namespace {

// Signed displacement of f^p(zeta + delta) from zeta (wrapped on the circle).
double local_map(const MapSystem& system, Point zeta, int p, double delta) {
  Point x = wrap_to_domain(system, Point(zeta.x + delta));
  if (system.domain != Domain::Circle) x = Point(zeta.x + delta);
  const Point y = iterate_point(system, x, static_cast<std::uint64_t>(p));
  double d = y.x - zeta.x;
  if (system.domain == Domain::Circle) d -= std::round(d);
  return d;
}

double pullback(const MapSystem& system, Point zeta, int p, double slope, double target) {
  if (target == 0.0) return 0.0;
  double delta = target / slope;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    const Point x = system.domain == Domain::Circle ? wrap_to_domain(system, Point(zeta.x + delta))
                                                    : Point(zeta.x + delta);
    const double fd = signed_derivative_along_orbit(system, x, static_cast<std::uint64_t>(p));
    if (!(fd * slope > 0.0)) {
      fail(ErrorCode::LinearizationBreakdown, "pullback left the monotone branch at zeta");
    }
    const double step = (local_map(system, zeta, p, delta) - target) / fd;
    delta -= step;
    // zeta + delta carries rounding of order ulp(x); stop once the step
    // reaches that level or stops shrinking there.
    const double floor = 1e-15 * (std::max(std::abs(zeta.x), std::abs(x.x)) + std::abs(delta)) + 1e-300;
    if (std::abs(step) <= floor || (std::abs(step) >= prev && std::abs(step) <= 1e3 * floor)) return delta;
    prev = std::abs(step);
  }
  fail(ErrorCode::LinearizationBreakdown, "Newton pullback did not converge");
}

}  // namespace

NestedBall nested_ball(const Observable& obs, const MapSystem& system, double u, int kappa) {
  if (kappa < 0) fail(ErrorCode::InvalidArgument, "kappa must be >= 0");
  if (system.dimension() != 1) fail(ErrorCode::InvalidArgument, "nested balls are computed on 1-D domains");
  if (!obs.is_periodic()) fail(ErrorCode::InvalidArgument, "nested balls need a periodic centre");
  const double r = obs.radius_for_level(u);
  const Point zeta = obs.center.zeta;
  const int p = obs.center.prime_period;
  const double slope = obs.center.signed_multiplier;
  double left0 = r;
  double right0 = r;
  if (system.domain == Domain::UnitInterval) {
    left0 = std::min(r, zeta.x);
    right0 = std::min(r, 1.0 - zeta.x);
  } else if (system.domain == Domain::SymmetricInterval) {
    left0 = std::min(r, zeta.x + 1.0);
    right0 = std::min(r, 1.0 - zeta.x);
  }
  NestedBall nb{0, left0, right0, {}};
  for (int k = 1; k <= kappa; ++k) {
    double lo_target = -nb.left;
    double hi_target = nb.right;
    if (slope < 0) std::swap(lo_target, hi_target);
    const double dl = pullback(system, zeta, p, slope, lo_target);
    const double dr = pullback(system, zeta, p, slope, hi_target);
    if (dl > 0.0 || dr < 0.0) fail(ErrorCode::LinearizationBreakdown, "pullback does not straddle zeta");
    nb.left = std::min(-dl, left0);
    nb.right = std::min(dr, right0);
    nb.kappa = k;
  }
  nb.region = ball(system, zeta, nb.left, nb.right);
  return nb;
}

std::optional<int> annulus_depth(Point x, const Observable& obs, const MapSystem& system, double u) {
  const RegionTest test(system, ball_for_threshold(system, obs, u));
  if (!test.contains(x)) return std::nullopt;
  const auto p = static_cast<std::uint64_t>(obs.period());
  int kappa = 0;
  for (;;) {
    x = iterate_point(system, x, p);
    if (!test.contains(x)) return kappa;
    if (++kappa > kMaxDepth) fail(ErrorCode::DepthOverflow, "depth exceeds 1e6");
  }
}

std::optional<int> state_depth(const MapSystem& system, const RegionTest& ball, OrbitState st, int period) {
  if (!ball.contains(st)) return std::nullopt;
  int kappa = 0;
  for (;;) {
    advance(system, st, static_cast<std::uint64_t>(period));
    if (!ball.contains(st)) return kappa;
    if (++kappa > kMaxDepth) fail(ErrorCode::DepthOverflow, "depth exceeds 1e6");
  }
}

// ---------------------------------------------------------------------------
// Extremal index

Potential bernoulli_potential(double alpha) {
  return [alpha](Point x) { return x.x < 0.5 ? std::log(alpha) : std::log(1.0 - alpha); };
}

Potential geometric_potential(const MapSystem& system) {
  return [system](Point x) { return -std::log(std::abs(branch_derivative(system, x))); };
}

double theoretical_ei(const MapSystem& system, const PeriodicPoint& pp, const Potential* potential) {
  if (!(pp.multiplier > 1.0)) fail(ErrorCode::NotRepelling, "multiplier must exceed 1");
  if (potential != nullptr && *potential) {
    double sum = 0.0;
    Point x = pp.zeta;
    for (int i = 0; i < pp.prime_period; ++i) {
      sum += (*potential)(x);
      x = apply_map(system, x);
    }
    return 1.0 - std::exp(sum);
  }
  if (system.family == Family::BernoulliDoubling) {
    fail(ErrorCode::MissingPotential, "the Bernoulli measure is not the acip; pass its potential");
  }
  return 1.0 - 1.0 / pp.multiplier;
}

// ---------------------------------------------------------------------------
// Measures

MeasureEstimate measure_of_region(const MapSystem& system, const Region& region, const MonteCarloOptions& mc) {
  switch (system.measure.kind) {
    case MeasureKind::Lebesgue: {
      double v = union_length(region.x);
      if (system.domain == Domain::Torus) v *= union_length(region.y);
      if (system.domain == Domain::SymmetricInterval) v *= 0.5;
      return {v, 0.0};
    }
    case MeasureKind::BernoulliWeights: {
      double v = 0.0;
      for (const auto& iv : region.x) {
        v += bernoulli_cdf(system.measure.alpha, iv.hi) - bernoulli_cdf(system.measure.alpha, iv.lo);
      }
      return {v, 0.0};
    }
    case MeasureKind::ArcsineDensity: {
      double v = 0.0;
      for (const auto& iv : region.x) v += arcsine_cdf(iv.hi) - arcsine_cdf(iv.lo);
      return {v, 0.0};
    }
    case MeasureKind::EmpiricalBurnIn: {
      // Ergodic average along one long orbit; standard error by batch means.
      constexpr std::size_t kBatches = 50;
      const std::size_t per = std::max<std::size_t>(1, mc.samples / kBatches);
      auto rng = make_stream(mc.seed, 0xB0A7);
      Point x = draw_point(system, rng);
      std::vector<double> batch(kBatches, 0.0);
      for (std::size_t b = 0; b < kBatches; ++b) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < per; ++i) {
          x = apply_map(system, x);
          hits += region.contains(x) ? 1 : 0;
        }
        batch[b] = static_cast<double>(hits) / static_cast<double>(per);
      }
      double mean = 0.0;
      for (double v : batch) mean += v;
      mean /= kBatches;
      double var = 0.0;
      for (double v : batch) var += (v - mean) * (v - mean);
      var /= (kBatches - 1);
      return {mean, std::sqrt(var / kBatches)};
    }
  }
  return {};
}

OrbitState sample_in_region(const MapSystem& system, const Region& region, Xoshiro256& rng) {
  if (region.empty()) fail(ErrorCode::InvalidArgument, "empty region");
  if (system.binary_tape()) {
    const double alpha = system.measure.kind == MeasureKind::BernoulliWeights ? system.measure.alpha : 0.5;
    const Arc arc = to_arc(region);
    // Split the arc into at most two non-wrapping fixed-point intervals.
    const unsigned __int128 two64 = static_cast<unsigned __int128>(1) << 64;
    const unsigned __int128 lo = arc.lo;
    const unsigned __int128 end = lo + arc.len;
    unsigned __int128 a_lo = lo, a_hi = std::min(end, two64), b_hi = end > two64 ? end - two64 : 0;
    const double ma = cylinder_fraction(alpha, 0, 64, a_lo, a_hi);
    const double mb = b_hi > 0 ? cylinder_fraction(alpha, 0, 64, 0, b_hi) : 0.0;
    std::uint64_t w;
    if (uniform01(rng) * (ma + mb) < ma) {
      w = sample_fixed(alpha, a_lo, a_hi, rng);
    } else {
      w = sample_fixed(alpha, 0, b_hi, rng);
    }
    OrbitState st;
    st.tape.emplace(2u, alpha, Xoshiro256(rng()));
    st.tape->set_prefix(w);
    refresh_point(system, st);
    return st;
  }
  switch (system.measure.kind) {
    case MeasureKind::Lebesgue:
    case MeasureKind::ArcsineDensity: {
      const bool arcsine = system.measure.kind == MeasureKind::ArcsineDensity;
      const auto cdf = [&](double v) { return arcsine ? arcsine_cdf(v) : v; };
      const auto pick = [&](const std::vector<Interval>& parts) {
        double total = 0.0;
        for (const auto& iv : parts) total += cdf(iv.hi) - cdf(iv.lo);
        double u = uniform01(rng) * total;
        for (const auto& iv : parts) {
          const double m = cdf(iv.hi) - cdf(iv.lo);
          if (u < m || &iv == &parts.back()) {
            const double q = cdf(iv.lo) + std::min(u, m);
            if (arcsine) return std::sin(std::numbers::pi * (q - 0.5));
            return q;
          }
          u -= m;
        }
        return parts.back().lo;
      };
      Point p(pick(region.x));
      if (!region.y.empty()) p.y = pick(region.y);
      return state_from_point(system, p, rng());
    }
    case MeasureKind::BernoulliWeights:
    case MeasureKind::EmpiricalBurnIn: {
      for (int attempt = 0; attempt < 1'000'000; ++attempt) {
        const Point p = draw_point(system, rng);
        if (region.contains(p)) return state_from_point(system, p, rng());
      }
      fail(ErrorCode::DegenerateEvent, "rejection sampling found no point in the region");
    }
  }
  fail(ErrorCode::InvalidArgument, "unsupported measure");
}

}  // namespace repp
