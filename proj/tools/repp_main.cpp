#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "repp/errors.hpp"
#include "repp/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_summary(const repp::Record& rec, const std::filesystem::path& dir) {
  std::cout << "experiment " << rec["experiment"].get<std::string>() << "  " << rec["system"].get<std::string>()
            << "\n";
  std::cout << "config_hash " << rec["config_hash"].get<std::string>() << "  seed " << rec["seed"] << "\n";
  if (!rec["theoretical_theta"].is_null()) std::cout << "theoretical theta " << rec["theoretical_theta"] << "\n";
  const auto& res = rec["results"];
  if (res.is_array()) {
    for (const auto& r : res) {
      if (r.contains("extremal_index")) {
        const auto& e = r["extremal_index"];
        std::cout << "n=" << r["n"] << "  theta_ratio " << e["theta_ratio"] << "  theta_cluster "
                  << e["theta_cluster"] << "  theta_runs " << e["theta_runs"] << "\n";
      } else if (r.contains("value")) {
        std::cout << "n=" << r["n"] << "  value " << r["value"] << "\n";
      }
    }
  }
  std::cout << "wrote " << (dir / "record.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repp: rare events and clustering for chaotic maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out_dir = "repp-out";
  auto* run = app.add_subcommand("run", "run an experiment config (a JSON file or recipe:NAME)");
  run->add_option("config", config_path, "config path")->required();
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "output directory");

  std::string write_dir;
  auto* rec_cmd = app.add_subcommand("recipes", "list the shipped acceptance configs");
  rec_cmd->add_option("--write", write_dir, "also write each recipe as NAME.json into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (rec_cmd->parsed()) {
    for (const auto& r : repp::recipes()) {
      std::cout << r.name << "  " << r.description << "\n";
      if (!write_dir.empty()) {
        std::filesystem::create_directories(write_dir);
        std::ofstream(std::filesystem::path(write_dir) / (std::string(r.name) + ".json")) << r.json;
      }
    }
    return 0;
  }

  repp::ExperimentConfig cfg;
  try {
    cfg = repp::load_config(config_path);
    if (seed) {
      nlohmann::json doc = nlohmann::json::parse(cfg.normalized.dump());
      doc["seed"] = *seed;
      cfg = repp::parse_config(doc);
    }
  } catch (const repp::Error& e) {
    std::cerr << "repp: " << e.what() << "\n";
    return e.code() == repp::ErrorCode::ConfigInvalid ? kExitConfig : kExitRuntime;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const repp::Record rec = repp::run_experiment(cfg, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    repp::write_outputs(rec, out_dir, wall);
    print_summary(rec, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "repp: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
