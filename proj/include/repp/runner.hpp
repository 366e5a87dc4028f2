#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "repp/extremes.hpp"

namespace repp {

inline constexpr std::string_view kLibraryVersion = "1.0.0";
inline constexpr int kRecordVersion = 1;

enum class ExperimentKind { Evl, Repp, HtsRts, InducedCompare, Conditions, BcCheck };

std::string_view to_string(ExperimentKind kind);

/// Validated experiment description. `normalized` is the canonical JSON form
/// (every key present, defaults filled in) that feeds the config hash.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Repp;
  std::string name;

  MapSystem system;
  std::optional<Point> zeta;
  std::vector<int> itinerary;
  bool periodic = true;
  Shape shape = Shape::NegLog;
  double s = 1.0;
  double D = 1.0;

  double tau = 1.0;
  std::vector<std::uint64_t> n;
  std::vector<WindowSet> windows;
  std::uint64_t trials = 100;
  std::uint64_t seed = 0;
  ThresholdMethod threshold = ThresholdMethod::Analytic;
  std::uint64_t calibration = 10'000'000;

  // hts_rts
  std::optional<Region> region;
  std::uint64_t hts_samples = 10'000;
  std::uint64_t kac_samples = 0;

  // induced_compare
  Region base_set;
  std::uint64_t burn_in_returns = 1000;
  std::uint64_t measure_samples = 10'000'000;
  double tv_threshold = 0.05;

  // conditions
  std::uint64_t samples = 10'000;
  std::vector<std::uint64_t> gaps;
  std::uint64_t gamma_n = 0;
  std::uint64_t gamma_samples = 0;

  // bc_check
  double c = 1.2;
  double bc_alpha = 0.01;
  int horizon = 50;

  nlohmann::ordered_json normalized;
};

/// Throws ConfigInvalid naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON file; "recipe:NAME" loads a compiled-in recipe.
ExperimentConfig load_config(const std::string& path);

using Record = nlohmann::ordered_json;

/// Runs the pipeline. The record depends only on the config (seed included),
/// never on the thread count.
Record run_experiment(const ExperimentConfig& config, unsigned threads = 1);

/// Canonical text of a record (what record.json holds).
std::string serialize_record(const Record& record);
std::string config_hash(const nlohmann::ordered_json& normalized);

/// Long-format CSV (x, y, series, ci_lo, ci_hi) for one table of the record.
std::string emit_plot_data(const Record& record, const std::string& table);
std::vector<std::string> table_names(const Record& record);

/// record.json, one CSV per table, and timing.json with the wall clock.
void write_outputs(const Record& record, const std::filesystem::path& dir, double wall_seconds);

struct Recipe {
  std::string_view name;
  std::string_view description;
  std::string_view json;
};

std::span<const Recipe> recipes();
const Recipe* find_recipe(std::string_view name);

}  // namespace repp
