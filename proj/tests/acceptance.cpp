// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "repp/cpdist.hpp"
#include "repp/errors.hpp"
#include "repp/geometry.hpp"
#include "repp/kernels.hpp"
#include "repp/runner.hpp"

namespace {

using repp::Record;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::map<std::string, Record> g_records;
std::map<std::string, std::string> g_bytes;

const Record& record(const std::string& name) {
  auto it = g_records.find(name);
  if (it != g_records.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = repp::load_config("recipe:" + name);
  Record rec = repp::run_experiment(cfg, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  [ran %s in %.1f s]\n", name.c_str(), secs);
  g_bytes[name] = repp::serialize_record(rec);
  return g_records.emplace(name, std::move(rec)).first->second;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// All three estimators inside [lo, hi] and every CI covering theta.
Outcome theta_check(const std::string& recipe, double lo, double hi) {
  const Record& r = record(recipe);
  const double theta = r["theoretical_theta"].get<double>();
  const auto& e = r["results"][0]["extremal_index"];
  Outcome o{true, "theory " + fmt("%.4f", theta) + ";"};
  for (const char* k : {"theta_ratio", "theta_cluster", "theta_runs"}) {
    const double v = e[k].get<double>();
    const auto& ci = e[std::string(k) + "_ci"];
    const bool ok = v >= lo && v <= hi && ci[0].get<double>() <= theta && theta <= ci[1].get<double>();
    o.pass = o.pass && ok;
    o.detail += std::string(" ") + k + " " + fmt("%.4f", v) + " [" + fmt("%.4f", ci[0].get<double>()) + ", " +
                fmt("%.4f", ci[1].get<double>()) + "]";
  }
  return o;
}

Outcome c1() { return theta_check("doubling-zeta0", 0.47, 0.53); }
Outcome c2() { return theta_check("doubling-zeta13", 0.72, 0.78); }
Outcome c3() { return theta_check("bernoulli-03", 0.67, 0.73); }
Outcome c4() { return theta_check("quadratic-a2", 0.46, 0.54); }

Outcome c5() {
  const double tv = record("doubling-zeta0")["results"][0]["cluster_size_tv"].get<double>();
  return {tv < 0.02, "cluster-size TV " + fmt("%.5f", tv) + " (limit 0.02)"};
}

Outcome c6() {
  const auto& ws = record("pa-counts")["results"][0]["windows"];
  Outcome o{true, ""};
  for (const auto& w : ws) {
    const double tv = w["gof"]["total_variation"].get<double>();
    const double p = w["gof"]["p_value"].get<double>();
    o.pass = o.pass && tv < 0.03 && p > 0.001;
    o.detail += "mass " + fmt("%g", w["mass"].get<double>()) + ": TV " + fmt("%.4f", tv) + " p " + fmt("%.3f", p) + "; ";
  }
  return o;
}

Outcome c7() {
  const double v = record("evl-doubling")["results"][0]["value"].get<double>();
  const double target = std::exp(-0.5);
  return {std::abs(v - target) <= 0.02, "P(M_n <= u_n) " + fmt("%.4f", v) + " vs " + fmt("%.4f", target)};
}

Outcome c8() {
  const auto& e = record("golden-control")["results"][0]["extremal_index"];
  Outcome o{true, ""};
  for (const char* k : {"theta_ratio", "theta_cluster", "theta_runs"}) {
    const double v = e[k].get<double>();
    o.pass = o.pass && v >= 0.97 && v <= 1.0;
    o.detail += std::string(k) + " " + fmt("%.4f", v) + "; ";
  }
  const double ks = record("hts-golden")["results"]["hts_ks_exponential"].get<double>();
  o.pass = o.pass && ks < 0.02;
  o.detail += "HTS KS " + fmt("%.4f", ks);
  return o;
}

Outcome c9() {
  const double a = record("hts-zeta0")["results"]["consistency_residual"].get<double>();
  const double b = record("hts-golden")["results"]["consistency_residual"].get<double>();
  return {a < 0.03 && b < 0.03, "residual periodic " + fmt("%.4f", a) + ", non-periodic " + fmt("%.4f", b)};
}

Outcome c10() {
  const double a = record("hts-zeta0")["results"]["kac"]["relative_deviation"].get<double>();
  const double b = record("kac-mp")["results"]["kac"]["relative_deviation"].get<double>();
  return {a < 0.02 && b < 0.02, "relative deviation doubling " + fmt("%.4f", a) + ", MP " + fmt("%.4f", b)};
}

Outcome c11() {
  const auto sys = repp::MapSystem::linear_mod_m(2);
  Outcome o{true, ""};
  for (const std::vector<int>& it : {std::vector<int>{0}, std::vector<int>{0, 1}}) {
    const auto pp = repp::find_periodic_point(sys, it);
    const auto obs = repp::Observable::periodic(pp);
    const double theta = repp::theoretical_ei(sys, pp);
    const double u = std::log(2000.0);
    const double base = repp::measure_of_region(sys, repp::ball_for_threshold(sys, obs, u)).value;
    double worst = 0.0;
    for (int k = 0; k <= 6; ++k) {
      const auto nb = repp::nested_ball(obs, sys, u, k);
      const double ratio = repp::measure_of_region(sys, nb.region).value / base;
      worst = std::max(worst, std::abs(ratio / std::pow(1.0 - theta, k) - 1.0));
    }
    o.pass = o.pass && worst < 0.01;
    o.detail += "zeta " + fmt("%.4f", pp.zeta.x) + ": max rel. error " + fmt("%.2e", worst) + "; ";
  }
  return o;
}

Outcome c12() {
  const auto& r = record("induced-mp")["results"];
  const double tv = r["tv"][0].get<double>();
  const double ctl = r["control_tv"][0].get<double>();
  return {tv < 0.05 && ctl == 0.0, "TV " + fmt("%.4f", tv) + ", whole-space control TV " + fmt("%g", ctl)};
}

Outcome c13() {
  double worst_norm = 0.0, worst_mean = 0.0, worst_var = 0.0, worst_lap = 0.0;
  bool poisson_exact = true;
  for (double theta : {0.05, 0.2, 0.5, 0.77, 0.95, 1.0}) {
    for (double t : {0.1, 1.0, 2.0, 5.0, 20.0}) {
      const repp::PolyaAeppli d(theta, t);
      const auto K = d.support_bound(1e-16);
      const auto pmf = d.pmf_table(K);
      long double s = 0, m1 = 0, m2 = 0;
      for (std::size_t k = 0; k < pmf.size(); ++k) {
        s += pmf[k];
        m1 += static_cast<long double>(k) * pmf[k];
        m2 += static_cast<long double>(k) * k * pmf[k];
      }
      const double mean = static_cast<double>(m1 / s);
      worst_norm = std::max(worst_norm, std::abs(static_cast<double>(s) - 1.0));
      worst_mean = std::max(worst_mean, std::abs(mean - t));
      worst_var = std::max(worst_var, std::abs(static_cast<double>(m2 / s) - mean * mean - d.variance()));
      for (double y : {0.05, 0.5, 1.0, 3.0}) {
        long double l = 0;
        for (std::size_t k = 0; k < pmf.size(); ++k) l += std::exp(-y * static_cast<double>(k)) * pmf[k];
        worst_lap = std::max(worst_lap, std::abs(static_cast<double>(l) - d.laplace(y)));
      }
      if (theta == 1.0) {
        for (std::uint64_t k = 0; k <= 60; ++k) poisson_exact = poisson_exact && repp::pa_pmf(1.0, t, k) == repp::poisson_pmf(t, k);
      }
    }
  }
  const bool pass = worst_norm <= 1e-10 && worst_mean <= 1e-8 && worst_var <= 1e-6 && worst_lap <= 1e-8 && poisson_exact;
  return {pass, "norm " + fmt("%.1e", worst_norm) + ", mean " + fmt("%.1e", worst_mean) + ", var " +
                    fmt("%.1e", worst_var) + ", laplace " + fmt("%.1e", worst_lap) +
                    (poisson_exact ? ", theta=1 equals Poisson" : ", theta=1 differs from Poisson")};
}

Outcome c14() {
  const auto& r = record("conditions-doubling")["results"];
  Outcome o{true, "S'(n):"};
  const auto& dp = r["dprime"];
  for (std::size_t i = 0; i < dp.size(); ++i) {
    o.detail += " " + fmt("%.4f", dp[i]["value"].get<double>());
    if (i > 0) o.pass = o.pass && dp[i]["value"].get<double>() < dp[i - 1]["value"].get<double>();
  }
  const auto& g = r["gamma"];
  double worst = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double si = g[i]["se"].get<double>(), sj = g[j]["se"].get<double>();
      const double excess = (g[j]["gamma"].get<double>() - g[i]["gamma"].get<double>()) / std::hypot(si, sj);
      worst = std::max(worst, excess);
    }
  }
  o.pass = o.pass && worst <= 3.0;
  o.detail += "; largest gamma rise " + fmt("%.2f", worst) + " SE (limit 3)";
  return o;
}

Outcome c15() {
  const auto& r = record("bc-a2")["results"];
  const bool flags = r["eg"].get<bool>() && r["ba"].get<bool>() && r["pa"].get<bool>();
  const int s = r["summable_stable_terms"].get<int>();
  const int d = r["dens_stable_terms"].get<int>();
  return {flags && s <= 20 && d <= 20, std::string("EG/BA/PA ") + (flags ? "hold" : "fail") +
                                           ", stable after " + std::to_string(s) + " and " + std::to_string(d) +
                                           " terms"};
}

Outcome c16() {
  Outcome o{true, ""};
  int checked = 0;
  for (const auto& rc : repp::recipes()) {
    const std::string name(rc.name);
    record(name);
    const auto cfg = repp::load_config("recipe:" + name);
    const std::string again = repp::serialize_record(repp::run_experiment(cfg, 3));
    const std::string reparsed = repp::serialize_record(Record::parse(g_bytes[name]));
    const bool same = again == g_bytes[name] && reparsed == g_bytes[name];
    if (!same) o.detail += name + " differs; ";
    o.pass = o.pass && same;
    ++checked;
  }
  o.detail += std::to_string(checked) + " recipes rerun with 3 threads and round-tripped";
  return o;
}

}  // namespace

int main() {
  std::printf("kernel ISA: %s\n", std::string(repp::kernels::isa_name(repp::kernels::active_isa())).c_str());
  const std::vector<std::function<Outcome()>> criteria = {c1, c2, c3, c4, c5, c6, c7, c8,
                                                          c9, c10, c11, c12, c13, c14, c15, c16};
  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    char head[64];
    std::snprintf(head, sizeof head, "criterion %2zu: %s  ", i + 1, o.pass ? "PASS" : "FAIL");
    lines.push_back(head + o.detail);
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
