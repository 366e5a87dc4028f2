#include "repp/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "repp/bc_check.hpp"
#include "repp/cpdist.hpp"
#include "repp/errors.hpp"
#include "repp/induced.hpp"
#include "repp/mixing.hpp"
#include "repp/parallel.hpp"

namespace repp {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Evl: return "evl";
    case ExperimentKind::Repp: return "repp";
    case ExperimentKind::HtsRts: return "hts_rts";
    case ExperimentKind::InducedCompare: return "induced_compare";
    case ExperimentKind::Conditions: return "conditions";
    case ExperimentKind::BcCheck: return "bc_check";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  fail(ErrorCode::ConfigInvalid, field + ": " + why);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment", "name",        "family",          "m",               "alpha",         "a",
      "matrix",     "burn_in",     "exact",           "measure",         "zeta",          "itinerary",
      "periodic",   "shape",       "s",               "D",               "tau",           "n",
      "windows",    "trials",      "seed",            "threshold",       "calibration",   "region",
      "hts_samples", "kac_samples", "base_set",       "burn_in_returns", "measure_samples", "tv_threshold",
      "samples",    "gaps",        "gamma_n",         "gamma_samples",   "c",             "bc_alpha",
      "horizon"};
  return keys;
}

double get_double(const json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc[key];
  if (!v.is_number()) invalid(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(key, "must be finite");
  return d;
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) invalid(key, "must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
  }
  invalid(key, "expected a non-negative integer");
}

std::uint64_t get_count(const json& doc, const std::string& key, std::uint64_t fallback) {
  return doc.contains(key) ? as_count(doc[key], key) : fallback;
}

bool get_bool(const json& doc, const std::string& key, bool fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_boolean()) invalid(key, "expected true or false");
  return doc[key].get<bool>();
}

std::string get_string(const json& doc, const std::string& key, const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_string()) invalid(key, "expected a string");
  return doc[key].get<std::string>();
}

std::vector<std::uint64_t> get_count_list(const json& doc, const std::string& key) {
  std::vector<std::uint64_t> out;
  if (!doc.contains(key)) return out;
  const json& v = doc[key];
  if (v.is_array()) {
    if (v.empty()) invalid(key, "list must not be empty");
    for (const auto& e : v) out.push_back(as_count(e, key));
  } else {
    out.push_back(as_count(v, key));
  }
  return out;
}

std::pair<double, double> get_pair(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    invalid(key, "expected [lo, hi]");
  }
  const double a = v[0].get<double>();
  const double b = v[1].get<double>();
  if (!(std::isfinite(a) && std::isfinite(b) && a < b)) invalid(key, "need finite lo < hi");
  return {a, b};
}

/// Intervals [lo, hi) inside the domain.
Region get_region(const json& doc, const std::string& key, const MapSystem& system) {
  const json& v = doc[key];
  if (!v.is_array() || v.empty()) invalid(key, "expected a non-empty list of [lo, hi]");
  if (system.dimension() != 1) invalid(key, "explicit regions are supported for 1-D systems only");
  const double dlo = system.domain == Domain::SymmetricInterval ? -1.0 : 0.0;
  Region r;
  for (const auto& e : v) {
    const auto [a, b] = get_pair(e, key);
    if (a < dlo || b > 1.0) invalid(key, "interval leaves the domain");
    r.x.push_back({a, b, true});
  }
  std::sort(r.x.begin(), r.x.end(), [](const Interval& p, const Interval& q) { return p.lo < q.lo; });
  for (std::size_t i = 1; i < r.x.size(); ++i) {
    if (r.x[i].lo < r.x[i - 1].hi) invalid(key, "intervals overlap");
  }
  return r;
}

ordered_json region_json(const Region& r) {
  ordered_json out = ordered_json::array();
  for (const auto& iv : r.x) out.push_back({iv.lo, iv.hi});
  return out;
}

MapSystem build_system(const json& doc) {
  const std::string family = get_string(doc, "family", "");
  if (family.empty()) invalid("family", "required");
  const auto burn = static_cast<std::size_t>(get_count(doc, "burn_in", 10'000));
  try {
    if (family == "linear_mod_m") {
      const std::uint64_t m = get_count(doc, "m", 2);
      if (m < 2 || m > 64) invalid("m", "must lie in 2..64");
      return MapSystem::linear_mod_m(static_cast<int>(m));
    }
    if (family == "bernoulli_doubling") {
      const double alpha = get_double(doc, "alpha", 0.5);
      if (!(alpha > 0.0 && alpha < 1.0)) invalid("alpha", "must lie in (0,1)");
      return MapSystem::bernoulli_doubling(alpha);
    }
    if (family == "countable_branch") return MapSystem::countable_branch();
    if (family == "manneville_pomeau") {
      const double alpha = get_double(doc, "alpha", 0.5);
      if (!(alpha > 0.0 && alpha < 1.0)) invalid("alpha", "must lie in (0,1)");
      return MapSystem::manneville_pomeau(alpha, burn);
    }
    if (family == "quadratic") {
      const double a = get_double(doc, "a", 2.0);
      if (!(a > 0.0 && a <= 2.0)) invalid("a", "must lie in (0,2]");
      return MapSystem::quadratic(a, burn);
    }
    if (family == "torus_linear") {
      std::array<std::int64_t, 4> mat{3, 1, 1, 2};
      if (doc.contains("matrix")) {
        const json& v = doc["matrix"];
        if (!v.is_array() || v.size() != 4) invalid("matrix", "expected four integers, row-major");
        for (std::size_t i = 0; i < 4; ++i) {
          if (!v[i].is_number_integer()) invalid("matrix", "entries must be integers");
          mat[i] = v[i].get<std::int64_t>();
        }
      }
      return MapSystem::torus_linear(mat);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    invalid("family", e.detail());
  }
  invalid("family", "unknown family '" + family + "'");
}

std::string measure_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::Lebesgue: return "lebesgue";
    case MeasureKind::BernoulliWeights: return "bernoulli";
    case MeasureKind::ArcsineDensity: return "arcsine";
    case MeasureKind::EmpiricalBurnIn: return "burn_in";
  }
  return "?";
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::NegLog: return "neglog";
    case Shape::PowerLaw: return "powerlaw";
    case Shape::Bounded: return "bounded";
  }
  return "?";
}

/// Center of the observable; nullopt when the config names none.
std::optional<PeriodicPoint> resolve_center(const ExperimentConfig& c) {
  if (!c.zeta && c.itinerary.empty()) return std::nullopt;
  try {
    if (!c.periodic) {
      PeriodicPoint pp;
      pp.zeta = wrap_to_domain(c.system, *c.zeta);
      pp.prime_period = 0;
      return pp;
    }
    if (!c.itinerary.empty()) return find_periodic_point(c.system, c.itinerary);
    return periodic_point_at(c.system, *c.zeta);
  } catch (const Error& e) {
    invalid(c.itinerary.empty() ? "zeta" : "itinerary", e.detail());
  }
}

Observable make_observable(const ExperimentConfig& c, const PeriodicPoint& pp) {
  Observable obs = c.periodic ? Observable::periodic(pp, c.shape) : Observable::aperiodic(pp.zeta, c.shape);
  obs.s = c.s;
  obs.D = c.D;
  return obs;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) invalid("config", "expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known_keys().count(key)) invalid(key, "unknown key");
  }
  ExperimentConfig c;
  const std::string kind = get_string(doc, "experiment", "");
  if (kind == "evl") c.kind = ExperimentKind::Evl;
  else if (kind == "repp") c.kind = ExperimentKind::Repp;
  else if (kind == "hts_rts") c.kind = ExperimentKind::HtsRts;
  else if (kind == "induced_compare") c.kind = ExperimentKind::InducedCompare;
  else if (kind == "conditions") c.kind = ExperimentKind::Conditions;
  else if (kind == "bc_check") c.kind = ExperimentKind::BcCheck;
  else invalid("experiment", kind.empty() ? "required" : "unknown experiment '" + kind + "'");
  c.name = get_string(doc, "name", "");

  c.system = build_system(doc);
  if (doc.contains("exact") && get_bool(doc, "exact", false) != c.system.exact_arithmetic) {
    invalid("exact", c.system.exact_arithmetic ? "this family only runs on exact digit tapes"
                                               : "exact arithmetic is available for integer-slope maps only");
  }
  if (doc.contains("measure") && get_string(doc, "measure", "") != measure_name(c.system.measure.kind)) {
    invalid("measure", "this family carries the '" + measure_name(c.system.measure.kind) + "' measure");
  }

  if (doc.contains("zeta") && doc.contains("itinerary")) invalid("zeta", "give either zeta or itinerary");
  if (doc.contains("zeta")) {
    const json& z = doc["zeta"];
    if (z.is_number()) {
      c.zeta = Point(z.get<double>());
    } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
      c.zeta = Point(z[0].get<double>(), z[1].get<double>());
    } else {
      invalid("zeta", "expected a number or [x, y]");
    }
    if ((c.system.dimension() == 2) != z.is_array()) invalid("zeta", "dimension does not match the system");
  }
  if (doc.contains("itinerary")) {
    const json& v = doc["itinerary"];
    if (!v.is_array() || v.empty()) invalid("itinerary", "expected a non-empty list of symbols");
    for (const auto& e : v) {
      if (!e.is_number_integer()) invalid("itinerary", "symbols must be integers");
      c.itinerary.push_back(e.get<int>());
    }
  }
  c.periodic = get_bool(doc, "periodic", true);
  if (!c.periodic && !c.zeta) invalid("zeta", "an aperiodic centre needs an explicit zeta");

  const std::string shape = get_string(doc, "shape", "neglog");
  if (shape == "neglog") c.shape = Shape::NegLog;
  else if (shape == "powerlaw") c.shape = Shape::PowerLaw;
  else if (shape == "bounded") c.shape = Shape::Bounded;
  else invalid("shape", "expected neglog, powerlaw or bounded");
  c.s = get_double(doc, "s", 1.0);
  c.D = get_double(doc, "D", 1.0);
  if (!(c.s > 0.0)) invalid("s", "must be positive");
  if (!(c.D > 0.0)) invalid("D", "must be positive");

  c.tau = get_double(doc, "tau", 1.0);
  if (!(c.tau > 0.0)) invalid("tau", "must be positive");
  c.n = get_count_list(doc, "n");
  for (auto n : c.n) {
    if (n < 2) invalid("n", "sample lengths must be at least 2");
    if (static_cast<double>(n) < c.tau) invalid("n", "must exceed tau so that mu(U) = tau/n < 1");
  }
  if (doc.contains("windows")) {
    const json& w = doc["windows"];
    if (!w.is_array() || w.empty()) invalid("windows", "expected a list of window unions");
    for (const auto& union_ : w) {
      if (!union_.is_array() || union_.empty()) invalid("windows", "each window is a list of [a, b]");
      WindowSet ws;
      for (const auto& part : union_) {
        const auto [a, b] = get_pair(part, "windows");
        if (a < 0.0) invalid("windows", "window ends must be non-negative");
        ws.parts.emplace_back(a, b);
      }
      std::sort(ws.parts.begin(), ws.parts.end());
      for (std::size_t i = 1; i < ws.parts.size(); ++i) {
        if (ws.parts[i].first < ws.parts[i - 1].second) invalid("windows", "parts of a window overlap");
      }
      c.windows.push_back(std::move(ws));
    }
  } else {
    c.windows.push_back(WindowSet{{{0.0, c.tau}}});
  }
  c.trials = get_count(doc, "trials", 100);
  if (c.trials == 0) invalid("trials", "must be positive");
  c.seed = get_count(doc, "seed", 0);
  const std::string thr = get_string(doc, "threshold", c.system.analytic_measure() ? "analytic" : "empirical");
  if (thr == "analytic") c.threshold = ThresholdMethod::Analytic;
  else if (thr == "empirical") c.threshold = ThresholdMethod::EmpiricalQuantile;
  else invalid("threshold", "expected analytic or empirical");
  if (c.threshold == ThresholdMethod::Analytic && !c.system.analytic_measure()) {
    invalid("threshold", "analytic thresholds need a closed-form measure");
  }
  c.calibration = get_count(doc, "calibration", 10'000'000);
  if (c.calibration < 1000) invalid("calibration", "must be at least 1000");

  if (doc.contains("region")) c.region = get_region(doc, "region", c.system);
  c.hts_samples = get_count(doc, "hts_samples", 10'000);
  c.kac_samples = get_count(doc, "kac_samples", 0);
  if (c.kac_samples == 1) invalid("kac_samples", "need 0 or at least 2");
  if (doc.contains("base_set")) c.base_set = get_region(doc, "base_set", c.system);
  c.burn_in_returns = get_count(doc, "burn_in_returns", 1000);
  c.measure_samples = get_count(doc, "measure_samples", 10'000'000);
  if (c.measure_samples < 1000) invalid("measure_samples", "must be at least 1000");
  c.tv_threshold = get_double(doc, "tv_threshold", 0.05);
  if (!(c.tv_threshold > 0.0 && c.tv_threshold <= 1.0)) invalid("tv_threshold", "must lie in (0,1]");

  c.samples = get_count(doc, "samples", 10'000);
  c.gaps = get_count_list(doc, "gaps");
  c.gamma_n = get_count(doc, "gamma_n", 0);
  c.gamma_samples = get_count(doc, "gamma_samples", c.samples);

  c.c = get_double(doc, "c", 1.2);
  c.bc_alpha = get_double(doc, "bc_alpha", 0.01);
  const std::uint64_t horizon = get_count(doc, "horizon", 50);
  if (horizon < 1) invalid("horizon", "must be at least 1");
  if (horizon > 10'000) invalid("horizon", "orbit precision is exhausted beyond 10^4 steps");
  c.horizon = static_cast<int>(horizon);

  // Per-experiment requirements.
  const bool needs_center = c.kind != ExperimentKind::HtsRts || !c.region;
  if (needs_center && !c.zeta && c.itinerary.empty()) invalid("zeta", "required (or give an itinerary)");
  const bool needs_n = c.kind != ExperimentKind::BcCheck && (c.kind != ExperimentKind::HtsRts || !c.region);
  if (needs_n && c.n.empty()) invalid("n", "required");
  switch (c.kind) {
    case ExperimentKind::Repp:
    case ExperimentKind::InducedCompare:
      if (c.system.dimension() != 1 && c.kind == ExperimentKind::InducedCompare) {
        invalid("family", "inducing is implemented for interval maps");
      }
      if (c.kind == ExperimentKind::InducedCompare) {
        if (c.base_set.empty()) invalid("base_set", "required");
        if (c.n.size() != 1) invalid("n", "induced comparison takes a single n");
      }
      break;
    case ExperimentKind::HtsRts:
      if (c.hts_samples == 0 && c.kac_samples == 0) invalid("hts_samples", "nothing to do");
      if (c.hts_samples == 1) invalid("hts_samples", "need 0 or at least 2");
      break;
    case ExperimentKind::Conditions:
      if (c.samples < 2) invalid("samples", "need at least 2");
      if (!c.gaps.empty() && c.gamma_n == 0) invalid("gamma_n", "required when gaps are given");
      if (c.gamma_n != 0 && c.gaps.empty()) invalid("gaps", "required when gamma_n is given");
      if (c.gamma_samples < 2 && !c.gaps.empty()) invalid("gamma_samples", "need at least 2");
      break;
    case ExperimentKind::BcCheck:
      if (c.system.family != Family::Quadratic) invalid("family", "bc_check runs on the quadratic family");
      if (!(c.c > 0.0)) invalid("c", "must be positive");
      if (!(c.bc_alpha > 0.0)) invalid("bc_alpha", "must be positive");
      if (!c.periodic) invalid("periodic", "the checker needs a periodic orbit");
      break;
    case ExperimentKind::Evl: break;
  }

  // Resolve the centre now so a bad zeta fails before any computation.
  const auto centre = resolve_center(c);
  if (centre && c.kind == ExperimentKind::InducedCompare && !c.base_set.contains(centre->zeta)) {
    invalid("base_set", "must contain zeta");
  }

  ordered_json& nj = c.normalized;
  nj["experiment"] = std::string(to_string(c.kind));
  nj["name"] = c.name;
  nj["family"] = get_string(doc, "family", "");
  switch (c.system.family) {
    case Family::LinearModM: nj["m"] = c.system.m; break;
    case Family::BernoulliDoubling:
    case Family::MannevillePomeau: nj["alpha"] = c.system.alpha; break;
    case Family::Quadratic: nj["a"] = c.system.a; break;
    case Family::TorusLinear: nj["matrix"] = c.system.matrix; break;
    case Family::CountableBranch: break;
  }
  nj["measure"] = measure_name(c.system.measure.kind);
  if (!c.system.analytic_measure()) nj["burn_in"] = c.system.measure.burn_in_steps;
  nj["exact"] = c.system.exact_arithmetic;
  if (c.zeta) {
    if (c.system.dimension() == 2) nj["zeta"] = {c.zeta->x, c.zeta->y};
    else nj["zeta"] = c.zeta->x;
  }
  if (!c.itinerary.empty()) nj["itinerary"] = c.itinerary;
  nj["periodic"] = c.periodic;
  nj["shape"] = shape_name(c.shape);
  nj["s"] = c.s;
  nj["D"] = c.D;
  nj["tau"] = c.tau;
  nj["n"] = c.n;
  ordered_json wins = ordered_json::array();
  for (const auto& w : c.windows) {
    ordered_json parts = ordered_json::array();
    for (const auto& [a, b] : w.parts) parts.push_back({a, b});
    wins.push_back(parts);
  }
  nj["windows"] = wins;
  nj["trials"] = c.trials;
  nj["seed"] = c.seed;
  nj["threshold"] = c.threshold == ThresholdMethod::Analytic ? "analytic" : "empirical";
  if (c.threshold == ThresholdMethod::EmpiricalQuantile) nj["calibration"] = c.calibration;
  switch (c.kind) {
    case ExperimentKind::HtsRts:
      if (c.region) nj["region"] = region_json(*c.region);
      nj["hts_samples"] = c.hts_samples;
      nj["kac_samples"] = c.kac_samples;
      break;
    case ExperimentKind::InducedCompare:
      nj["base_set"] = region_json(c.base_set);
      nj["burn_in_returns"] = c.burn_in_returns;
      nj["measure_samples"] = c.measure_samples;
      nj["tv_threshold"] = c.tv_threshold;
      break;
    case ExperimentKind::Conditions:
      nj["samples"] = c.samples;
      nj["gaps"] = c.gaps;
      nj["gamma_n"] = c.gamma_n;
      nj["gamma_samples"] = c.gamma_samples;
      break;
    case ExperimentKind::BcCheck:
      nj["c"] = c.c;
      nj["bc_alpha"] = c.bc_alpha;
      nj["horizon"] = c.horizon;
      break;
    default: break;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  if (path.rfind("recipe:", 0) == 0) {
    const Recipe* r = find_recipe(path.substr(7));
    if (!r) invalid("config", "no recipe named '" + path.substr(7) + "'");
    text = r->json;
  } else {
    std::ifstream in(path);
    if (!in) invalid("config", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Records

namespace {

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
  std::uint64_t h = master ^ (tag * 0x9E3779B97F4A7C15ULL);
  splitmix64(h);
  h ^= index * 0xC2B2AE3D27D4EB4FULL;
  return splitmix64(h);
}

ordered_json num_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json ci_json(const Ci& ci) { return ordered_json::array({ci.lo, ci.hi}); }

/// Long-format table accumulator.
class Table {
 public:
  void add(double x, double y, const std::string& series, std::optional<Ci> ci = std::nullopt) {
    rows_.push_back(ordered_json::array({num_or_null(x), num_or_null(y), series, ci ? num_or_null(ci->lo) : nullptr,
                                         ci ? num_or_null(ci->hi) : nullptr}));
  }
  ordered_json json() const {
    ordered_json t;
    t["columns"] = {"x", "y", "series", "ci_lo", "ci_hi"};
    t["rows"] = rows_;
    return t;
  }

 private:
  ordered_json rows_ = ordered_json::array();
};

ordered_json schedule_json(const ThresholdSchedule& s) {
  ordered_json j;
  j["n"] = s.n;
  j["tau"] = s.tau;
  j["u"] = s.u;
  j["radius"] = s.radius;
  j["v"] = s.v;
  j["mu_ball"] = s.mu_ball;
  j["mu_se"] = s.mu_se;
  return j;
}

ordered_json ei_json(const EIEstimate& e) {
  ordered_json j;
  j["exceedances"] = e.exceedances;
  j["clusters"] = e.clusters;
  j["theta_ratio"] = e.theta_ratio;
  j["theta_ratio_ci"] = ci_json(e.ratio_ci);
  j["theta_cluster"] = e.theta_cluster;
  j["theta_cluster_ci"] = ci_json(e.cluster_ci);
  j["theta_runs"] = e.theta_runs;
  j["theta_runs_ci"] = ci_json(e.runs_ci);
  return j;
}

ordered_json gof_json(const GofReport& g) {
  ordered_json j;
  j["total_variation"] = g.total_variation;
  j["chi_square"] = g.chi_square;
  j["dof"] = g.dof;
  j["p_value"] = g.p_value;
  j["observations"] = g.observations;
  return j;
}

std::vector<std::uint64_t> histogram(std::span<const std::uint64_t> counts) {
  std::vector<std::uint64_t> h;
  for (auto c : counts) {
    if (c >= h.size()) h.resize(c + 1, 0);
    ++h[c];
  }
  return h;
}

/// TV between observed cluster sizes and theta (1-theta)^(s-1).
double size_law_tv(const std::vector<std::uint64_t>& hist, double theta) {
  double total = 0.0;
  for (std::size_t s = 1; s < hist.size(); ++s) total += static_cast<double>(hist[s]);
  if (total == 0.0) return 1.0;
  double tv = 0.0;
  double covered = 0.0;
  for (std::size_t s = 1; s < hist.size(); ++s) {
    const double q = multiplicity_pmf(theta, s);
    covered += q;
    tv += std::abs(static_cast<double>(hist[s]) / total - q);
  }
  tv += std::max(0.0, 1.0 - covered);
  return 0.5 * tv;
}

struct Centre {
  PeriodicPoint pp;
  Observable obs;
  std::optional<double> theta;
};

Centre centre_of(const ExperimentConfig& c) {
  Centre out;
  out.pp = *resolve_center(c);
  out.obs = make_observable(c, out.pp);
  if (!c.periodic) {
    out.theta = 1.0;
  } else if (c.system.family == Family::BernoulliDoubling) {
    const Potential phi = bernoulli_potential(c.system.alpha);
    out.theta = theoretical_ei(c.system, out.pp, &phi);
  } else {
    out.theta = theoretical_ei(c.system, out.pp);
  }
  return out;
}

ordered_json centre_json(const ExperimentConfig& c, const Centre& z) {
  ordered_json j;
  if (c.system.dimension() == 2) j["zeta"] = {z.pp.zeta.x, z.pp.zeta.y};
  else j["zeta"] = z.pp.zeta.x;
  j["period"] = z.obs.period();
  j["periodic"] = z.obs.is_periodic();
  if (z.obs.is_periodic()) j["multiplier"] = z.pp.multiplier;
  return j;
}

std::uint64_t horizon_for(const ThresholdSchedule& sch, const std::vector<WindowSet>& windows) {
  double sup = 0.0;
  for (const auto& w : windows) sup = std::max(sup, w.sup());
  return std::max<std::uint64_t>(sch.n, static_cast<std::uint64_t>(std::ceil(sup * sch.v)));
}

std::string fmt_g(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void add_count_tables(Table& hist_table, ordered_json& out, const ReppCounts& rc, const std::string& prefix,
                      std::optional<double> theta) {
  for (std::size_t w = 0; w < rc.windows.size(); ++w) {
    ordered_json wj;
    ordered_json parts = ordered_json::array();
    for (const auto& [a, b] : rc.windows[w].parts) parts.push_back({a, b});
    wj["window"] = parts;
    wj["mass"] = rc.windows[w].mass();
    const auto& counts = rc.counts[w];
    double mean = 0.0;
    for (auto k : counts) mean += static_cast<double>(k);
    mean /= static_cast<double>(counts.size());
    double var = 0.0;
    for (auto k : counts) var += (static_cast<double>(k) - mean) * (static_cast<double>(k) - mean);
    var /= std::max<double>(1.0, static_cast<double>(counts.size()) - 1.0);
    wj["mean"] = mean;
    wj["variance"] = var;
    const auto h = histogram(counts);
    wj["histogram"] = h;
    if (theta) {
      const PolyaAeppli model(*theta, rc.windows[w].mass());
      wj["model_mean"] = model.mean();
      wj["model_variance"] = model.variance();
      if (counts.size() >= 200) wj["gof"] = gof_json(gof(counts, model));
      else wj["gof"] = nullptr;
    }
    const std::string series = prefix + "J" + std::to_string(w) + " mass=" + fmt_g(rc.windows[w].mass());
    for (std::size_t k = 0; k < h.size(); ++k) hist_table.add(static_cast<double>(k), static_cast<double>(h[k]), series);
    out.push_back(std::move(wj));
  }
}

std::vector<OrbitState> initial_states(const MapSystem& system, std::uint64_t seed, std::uint64_t trials,
                                       unsigned threads) {
  std::vector<OrbitState> init(trials);
  parallel_for(trials, threads, [&](std::size_t k) {
    in_trial(k, [&] { init[k] = sample_orbit_state(system, seed, k); });
  });
  return init;
}

// ---------------------------------------------------------------------------
// Pipelines

void run_repp(const ExperimentConfig& c, const Centre& z, unsigned threads, Record& rec,
              std::map<std::string, Table>& tables) {
  ordered_json results = ordered_json::array();
  Table& theta_table = tables["theta_vs_n"];
  Table& hist_table = tables["count_histogram"];
  Table& size_table = tables["cluster_sizes"];
  const int p = z.obs.period();
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const std::uint64_t n = c.n[i];
    const ThresholdSchedule sch =
        make_threshold(c.system, z.obs, n, c.tau, c.threshold, c.calibration, sub_seed(c.seed, 1, i));
    const std::uint64_t horizon = horizon_for(sch, c.windows);
    auto init = initial_states(c.system, sub_seed(c.seed, 2, i), c.trials, threads);
    const auto series = scan_many(c.system, z.obs, sch, std::move(init), horizon, threads);

    ordered_json r;
    r["n"] = n;
    r["schedule"] = schedule_json(sch);
    r["horizon"] = horizon;
    r["trials"] = c.trials;
    const EIEstimate ei = estimate_ei(series, sch, p, sub_seed(c.seed, 3, i));
    r["extremal_index"] = ei_json(ei);
    const auto sizes = cluster_size_histogram(series);
    r["cluster_size_histogram"] = sizes;
    r["cluster_size_tv"] = z.theta ? ordered_json(size_law_tv(sizes, *z.theta)) : ordered_json(nullptr);
    const EvlEstimate evl = evl_from_series(series, n);
    r["evl"] = {{"value", evl.value}, {"ci", ci_json(evl.ci)}};
    if (z.theta) r["evl"]["theory"] = std::exp(-*z.theta * c.tau);
    const ReppCounts rc = build_repp(series, sch, c.windows);
    ordered_json windows = ordered_json::array();
    add_count_tables(hist_table, windows, rc, "n=" + std::to_string(n) + " ", z.theta);
    r["windows"] = std::move(windows);
    results.push_back(std::move(r));

    const double x = static_cast<double>(n);
    theta_table.add(x, ei.theta_ratio, "theta_ratio", ei.ratio_ci);
    theta_table.add(x, ei.theta_cluster, "theta_cluster", ei.cluster_ci);
    theta_table.add(x, ei.theta_runs, "theta_runs", ei.runs_ci);
    if (z.theta) theta_table.add(x, *z.theta, "theory");
    for (std::size_t s = 1; s < sizes.size(); ++s) {
      size_table.add(static_cast<double>(s), static_cast<double>(sizes[s]), "n=" + std::to_string(n));
    }
  }
  rec["results"] = std::move(results);
}

void run_evl(const ExperimentConfig& c, const Centre& z, unsigned threads, Record& rec,
             std::map<std::string, Table>& tables) {
  ordered_json results = ordered_json::array();
  Table& t = tables["evl_vs_n"];
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const std::uint64_t n = c.n[i];
    const ThresholdSchedule sch =
        make_threshold(c.system, z.obs, n, c.tau, c.threshold, c.calibration, sub_seed(c.seed, 1, i));
    const EvlEstimate e = empirical_evl(c.system, z.obs, sch, c.trials, sub_seed(c.seed, 2, i), threads);
    ordered_json r;
    r["n"] = n;
    r["schedule"] = schedule_json(sch);
    r["trials"] = e.trials;
    r["value"] = e.value;
    r["ci"] = ci_json(e.ci);
    const double theory = std::exp(-*z.theta * c.tau);
    r["theory"] = theory;
    results.push_back(std::move(r));
    t.add(static_cast<double>(n), e.value, "empirical", e.ci);
    t.add(static_cast<double>(n), theory, "theory");
  }
  rec["results"] = std::move(results);
}

void run_hts_rts(const ExperimentConfig& c, const std::optional<Centre>& z, unsigned threads, Record& rec,
                 std::map<std::string, Table>& tables) {
  ordered_json r;
  Region region;
  if (c.region) {
    region = *c.region;
  } else {
    const ThresholdSchedule sch =
        make_threshold(c.system, z->obs, c.n.front(), c.tau, c.threshold, c.calibration, sub_seed(c.seed, 1));
    r["schedule"] = schedule_json(sch);
    region = ball_for_threshold(c.system, z->obs, sch.u);
  }
  r["region"] = region_json(region);
  if (c.hts_samples > 0) {
    const HtsRts hr = empirical_hts_rts(c.system, region, c.hts_samples, sub_seed(c.seed, 4), threads);
    r["mu"] = hr.mu;
    r["samples"] = c.hts_samples;
    r["consistency_residual"] = hts_rts_consistency(hr.hts, hr.rts);
    r["hts_ks_exponential"] = hr.hts.ks_distance([](double t) { return t <= 0.0 ? 0.0 : 1.0 - std::exp(-t); });
    const bool has_theta = z && z->theta;
    const double th = has_theta ? *z->theta : 1.0;
    if (has_theta) {
      r["hts_ks_theory"] = hr.hts.ks_distance([th](double t) { return t <= 0.0 ? 0.0 : 1.0 - std::exp(-th * t); });
      r["rts_ks_theory"] =
          hr.rts.ks_distance([th](double t) { return t < 0.0 ? 0.0 : 1.0 - th * std::exp(-th * t); });
    }
    Table& t = tables["cdf"];
    const auto quantile = [](const EmpiricalCdf& F, double q) {
      const auto& v = F.values();
      return v[std::min(v.size() - 1, static_cast<std::size_t>(q * static_cast<double>(v.size())))];
    };
    const double tmax = std::max(quantile(hr.hts, 0.99), quantile(hr.rts, 0.99));
    constexpr int kGrid = 200;
    for (int j = 0; j <= kGrid; ++j) {
      const double x = tmax * j / kGrid;
      t.add(x, hr.hts(x), "hts");
      t.add(x, hr.rts(x), "rts");
      if (has_theta) {
        t.add(x, 1.0 - std::exp(-th * x), "hts_theory");
        t.add(x, 1.0 - th * std::exp(-th * x), "rts_theory");
      }
    }
  }
  if (c.kac_samples > 0) {
    const KacReport k = kac_check(c.system, region, c.kac_samples, sub_seed(c.seed, 5), threads);
    r["kac"] = {{"samples", c.kac_samples},
                {"mean_return", k.mean_return},
                {"mean_se", k.mean_se},
                {"inverse_measure", k.inverse_measure},
                {"relative_deviation", k.relative_deviation}};
  }
  rec["results"] = std::move(r);
}

void run_induced(const ExperimentConfig& c, const Centre& z, unsigned threads, Record& rec,
                 std::map<std::string, Table>& tables) {
  const std::uint64_t n = c.n.front();
  const ThresholdSchedule sch =
      make_threshold(c.system, z.obs, n, c.tau, c.threshold, c.calibration, sub_seed(c.seed, 1));
  MonteCarloOptions mc;
  mc.samples = c.measure_samples;
  mc.seed = sub_seed(c.seed, 6);
  const InducedSystem ind = make_induced(c.system, c.base_set, mc, c.burn_in_returns);
  const InducedSystem whole = make_induced(c.system, std::nullopt, mc, c.burn_in_returns);
  const int p_hat = induced_period(ind, z.pp);
  const ThresholdSchedule isch = induced_schedule(ind, sch);
  const ThresholdSchedule wsch = induced_schedule(whole, sch);
  const std::uint64_t horizon = horizon_for(sch, c.windows);
  const std::uint64_t ihorizon = horizon_for(isch, c.windows);
  const std::uint64_t trial_seed = sub_seed(c.seed, 2);

  std::vector<ClusterSeries> orig(c.trials), induced(c.trials), control(c.trials);
  const Observable ind_obs = z.obs;
  parallel_for(c.trials, threads, [&](std::size_t k) {
    in_trial(k, [&] {
      induced[k] = induced_process(ind, ind_obs, isch, sample_induced(ind, trial_seed, k), ihorizon, p_hat);
      control[k] = induced_process(whole, ind_obs, wsch, sample_induced(whole, trial_seed, k), horizon,
                                   z.obs.period());
    });
  });
  orig = scan_many(c.system, z.obs, sch, initial_states(c.system, trial_seed, c.trials, threads), horizon, threads);

  const ReppCounts rc_o = build_repp(orig, sch, c.windows);
  const ReppCounts rc_i = build_repp(induced, isch, c.windows);
  const ReppCounts rc_w = build_repp(control, wsch, c.windows);
  const ReppComparison cmp = compare_repp(rc_o, c.tau, rc_i, c.tau, c.tv_threshold);
  const ReppComparison ctl = compare_repp(rc_o, c.tau, rc_w, c.tau, c.tv_threshold);

  ordered_json r;
  r["n"] = n;
  r["schedule"] = schedule_json(sch);
  r["induced_schedule"] = schedule_json(isch);
  r["base_set"] = region_json(c.base_set);
  r["mu_base"] = ind.mu_base;
  r["mu_base_se"] = ind.mu_base_se;
  r["induced_period"] = p_hat;
  r["trials"] = c.trials;
  r["tv"] = cmp.tv;
  r["tv_threshold"] = cmp.threshold;
  r["pass"] = cmp.pass;
  r["control_tv"] = ctl.tv;
  const auto theta_of = [&](const std::vector<ClusterSeries>& s, const ThresholdSchedule& ts, int p, int tag) {
    try {
      return ei_json(estimate_ei(s, ts, p, sub_seed(c.seed, 3, static_cast<std::uint64_t>(tag))));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewClusters) throw;
      return ordered_json(nullptr);
    }
  };
  r["original_extremal_index"] = theta_of(orig, sch, z.obs.period(), 0);
  r["induced_extremal_index"] = theta_of(induced, isch, p_hat, 1);
  Table& hist = tables["count_histogram"];
  ordered_json wo = ordered_json::array(), wi = ordered_json::array(), ww = ordered_json::array();
  add_count_tables(hist, wo, rc_o, "original ", z.theta);
  add_count_tables(hist, wi, rc_i, "induced ", z.theta);
  add_count_tables(hist, ww, rc_w, "control ", z.theta);
  r["original_windows"] = std::move(wo);
  r["induced_windows"] = std::move(wi);
  r["control_windows"] = std::move(ww);
  rec["results"] = std::move(r);
}

void run_conditions(const ExperimentConfig& c, const Centre& z, unsigned threads, Record& rec,
                    std::map<std::string, Table>& tables) {
  ordered_json r;
  ordered_json dp = ordered_json::array();
  Table& dt = tables["dprime_vs_n"];
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const ThresholdSchedule sch =
        make_threshold(c.system, z.obs, c.n[i], c.tau, c.threshold, c.calibration, sub_seed(c.seed, 1, i));
    const DprimeEstimate d = dprime_sum(c.system, z.obs, sch, c.samples, sub_seed(c.seed, 7, i),
                                        KRule::LogSquared, threads);
    dp.push_back({{"n", d.n}, {"kn", d.kn}, {"jmax", d.jmax}, {"value", d.value}, {"se", d.se},
                  {"samples", d.samples}});
    dt.add(static_cast<double>(d.n), d.value, "dprime", Ci{d.value - 1.96 * d.se, d.value + 1.96 * d.se});
  }
  r["dprime"] = std::move(dp);
  if (!c.gaps.empty()) {
    const ThresholdSchedule sch = make_threshold(c.system, z.obs, c.gamma_n, c.tau, c.threshold, c.calibration,
                                                 sub_seed(c.seed, 1, 1000));
    EventSpec ev;
    ev.kappa1 = 0;
    ev.kind = EventSpec::Kind::Counts;
    ev.counts = {{0, t_n(c.gamma_n), 0}};
    ordered_json gj = ordered_json::array();
    Table& gt = tables["gamma_vs_gap"];
    for (std::size_t i = 0; i < c.gaps.size(); ++i) {
      const GammaEstimate g =
          estimate_gamma(c.system, z.obs, sch, c.gaps[i], ev, c.gamma_samples, sub_seed(c.seed, 8, i), threads);
      gj.push_back({{"gap", c.gaps[i]}, {"gamma", g.gamma}, {"se", g.se}, {"p_a", g.p_a}, {"p_b", g.p_b},
                    {"p_b_given_a", g.p_b_given_a}, {"a_hits", g.a_hits}});
      gt.add(static_cast<double>(c.gaps[i]), g.gamma, "gamma", Ci{g.gamma - 1.96 * g.se, g.gamma + 1.96 * g.se});
    }
    r["gamma_n"] = c.gamma_n;
    r["event_window"] = t_n(c.gamma_n);
    r["gamma"] = std::move(gj);
  }
  rec["results"] = std::move(r);
}

void run_bc(const ExperimentConfig& c, const Centre& z, Record& rec, std::map<std::string, Table>& tables) {
  const BcReport b = check_finite_time(c.system.a, z.pp, c.horizon, c.c, c.bc_alpha);
  ordered_json r;
  r["a"] = b.a;
  r["N"] = b.N;
  r["c"] = b.c;
  r["alpha"] = b.alpha;
  r["gamma"] = b.gamma;
  r["N1"] = b.N1;
  r["eg"] = b.eg;
  r["ba"] = b.ba;
  r["pa"] = b.pa;
  r["precision_warning"] = b.precision_warning;
  r["summable_sum"] = b.records.back().summable_partial;
  r["dens_sum"] = b.records.back().dens_partial;
  r["summable_stable_terms"] = b.summable_stable_terms();
  r["dens_stable_terms"] = b.dens_stable_terms();
  Table& t = tables["bc_partial_sums"];
  for (const auto& rr : b.records) {
    if (rr.n == 0) continue;
    t.add(rr.n, rr.summable_partial, "summable");
    t.add(rr.n, rr.dens_partial, "dens");
  }
  rec["results"] = std::move(r);
}

}  // namespace

std::string config_hash(const ordered_json& normalized) {
  const std::string text = normalized.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

Record run_experiment(const ExperimentConfig& c, unsigned threads) {
  Record rec;
  rec["format"] = "repp-record";
  rec["record_version"] = kRecordVersion;
  rec["library_version"] = std::string(kLibraryVersion);
  rec["config_hash"] = config_hash(c.normalized);
  rec["config"] = c.normalized;
  rec["seed"] = c.seed;
  rec["experiment"] = std::string(to_string(c.kind));
  rec["system"] = c.system.name();

  std::optional<Centre> z;
  if (c.zeta || !c.itinerary.empty()) {
    z = centre_of(c);
    rec["center"] = centre_json(c, *z);
    rec["theoretical_theta"] = num_or_null(z->theta.value_or(NAN));
  } else {
    rec["center"] = nullptr;
    rec["theoretical_theta"] = nullptr;
  }

  std::map<std::string, Table> tables;
  switch (c.kind) {
    case ExperimentKind::Repp: run_repp(c, *z, threads, rec, tables); break;
    case ExperimentKind::Evl: run_evl(c, *z, threads, rec, tables); break;
    case ExperimentKind::HtsRts: run_hts_rts(c, z, threads, rec, tables); break;
    case ExperimentKind::InducedCompare: run_induced(c, *z, threads, rec, tables); break;
    case ExperimentKind::Conditions: run_conditions(c, *z, threads, rec, tables); break;
    case ExperimentKind::BcCheck: run_bc(c, *z, rec, tables); break;
  }
  ordered_json tj = ordered_json::object();
  for (const auto& [name, t] : tables) tj[name] = t.json();
  rec["tables"] = std::move(tj);
  return rec;
}

std::string serialize_record(const Record& record) { return record.dump(2) + "\n"; }

std::vector<std::string> table_names(const Record& record) {
  std::vector<std::string> out;
  if (record.contains("tables")) {
    for (const auto& [name, _] : record["tables"].items()) out.push_back(name);
  }
  return out;
}

std::string emit_plot_data(const Record& record, const std::string& table) {
  if (!record.contains("tables") || !record["tables"].contains(table)) {
    fail(ErrorCode::MissingTable, "record has no table '" + table + "'");
  }
  std::string out = "x,y,series,ci_lo,ci_hi\n";
  for (const auto& row : record["tables"][table]["rows"]) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const auto& v = row[i];
      if (v.is_null()) continue;
      if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") != std::string::npos) {
          out += '"';
          for (char ch : s) {
            if (ch == '"') out += '"';
            out += ch;
          }
          out += '"';
        } else {
          out += s;
        }
      } else {
        out += v.dump();
      }
    }
    out += '\n';
  }
  return out;
}

void write_outputs(const Record& record, const std::filesystem::path& dir, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::InvalidArgument, "cannot create output directory " + dir.string() + ": " + ec.message());
  const auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + p.string());
  };
  write(dir / "record.json", serialize_record(record));
  for (const auto& name : table_names(record)) write(dir / (name + ".csv"), emit_plot_data(record, name));
  ordered_json timing;
  timing["config_hash"] = record.value("config_hash", "");
  timing["wall_seconds"] = wall_seconds;
  write(dir / "timing.json", timing.dump(2) + "\n");
}

const Recipe* find_recipe(std::string_view name) {
  for (const auto& r : recipes()) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace repp
