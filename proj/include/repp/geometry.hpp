#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "repp/dynsys.hpp"

namespace repp {

/// Interval (lo, hi) in domain coordinates, or [lo, hi) when closed_lo.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_lo = false;
  double length() const { return hi - lo; }
  bool contains(double v) const { return (v > lo || (closed_lo && v == lo)) && v < hi; }
};

/// Finite union of intervals (1-D) or a product of unions (torus boxes).
struct Region {
  std::vector<Interval> x;
  std::vector<Interval> y;  // empty unless the domain is the torus

  bool contains(Point p) const;
  bool empty() const { return x.empty(); }
};

/// A region of the circle/unit interval as one wrap-around arc of 0.64 fixed
/// point numbers: w is inside iff (w - lo) mod 2^64 < len. Open and closed
/// ends coincide here; tape points sit on an endpoint with probability zero.
struct Arc {
  std::uint64_t lo = 0;
  std::uint64_t len = 0;
  bool contains(std::uint64_t w) const { return w - lo < len; }
};

/// Fails with InvalidArgument when the region is not a single arc.
Arc to_arc(const Region& region);

enum class Shape { NegLog, PowerLaw, Bounded };

/// phi(x) = g(dist(x, zeta)) for one of three decreasing profiles g.
struct Observable {
  PeriodicPoint center;  // prime_period == 0 marks an aperiodic centre
  Shape shape = Shape::NegLog;
  double s = 1.0;  // PowerLaw / Bounded exponent
  double D = 1.0;  // Bounded supremum

  static Observable periodic(const PeriodicPoint& pp, Shape shape = Shape::NegLog);
  static Observable aperiodic(Point zeta, Shape shape = Shape::NegLog);

  /// Lag used for clusters; 1 for aperiodic centres.
  int period() const { return center.prime_period > 0 ? center.prime_period : 1; }
  bool is_periodic() const { return center.prime_period > 0; }

  double g(double distance) const;
  /// g^{-1}(u); throws LevelOutOfRange outside (0, 1).
  double radius_for_level(double u) const;
  double upper_endpoint() const;
  double operator()(const MapSystem& system, Point x) const;
};

/// Ball (zeta - left, zeta + right) clipped or wrapped to the domain.
Region ball(const MapSystem& system, Point zeta, double left, double right);
Region ball_for_threshold(const MapSystem& system, const Observable& obs, double u);

/// Membership test that reads tape digits directly when they exist.
class RegionTest {
 public:
  RegionTest(const MapSystem& system, Region region);
  bool contains(Point p) const { return region_.contains(p); }
  bool contains(const OrbitState& st) const;
  const Region& region() const { return region_; }
  const std::optional<Arc>& arc() const { return arc_; }

 private:
  Region region_;
  std::optional<Arc> arc_;
};

struct NestedBall {
  int kappa = 0;
  double left = 0.0;   // distance from zeta to the left edge
  double right = 0.0;  // distance from zeta to the right edge
  Region region;
};

/// U^(kappa)(u): kappa pullbacks of U(u) through the local inverse of f^p at
/// zeta, each solved by Newton's method from the linearization.
NestedBall nested_ball(const Observable& obs, const MapSystem& system, double u, int kappa);

constexpr int kMaxDepth = 1'000'000;

/// Unique kappa with x in Q^kappa_{p,0}(u); nullopt when phi(x) <= u.
std::optional<int> annulus_depth(Point x, const Observable& obs, const MapSystem& system, double u);
/// Depth of a state given the ball test; `state` is advanced in place.
std::optional<int> state_depth(const MapSystem& system, const RegionTest& ball, OrbitState state, int period);

using Potential = std::function<double(Point)>;
/// log(alpha) on [0,1/2), log(1-alpha) on [1/2,1).
Potential bernoulli_potential(double alpha);
/// -log|Df| (Lebesgue-equivalent potentials).
Potential geometric_potential(const MapSystem& system);

/// theta = 1 - e^{S_p phi(zeta)} when a potential is given, otherwise
/// 1 - 1/|Df^p(zeta)| (1 - 1/|det Df^p| on the torus).
double theoretical_ei(const MapSystem& system, const PeriodicPoint& pp,
                      const Potential* potential = nullptr);

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for closed-form measures
};

struct MonteCarloOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
};

MeasureEstimate measure_of_region(const MapSystem& system, const Region& region,
                                  const MonteCarloOptions& mc = {});

/// Draw from the invariant measure conditioned on `region`.
OrbitState sample_in_region(const MapSystem& system, const Region& region, Xoshiro256& rng);

}  // namespace repp
