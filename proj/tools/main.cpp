// ncentre: batch runner for fixed-energy N-centre experiments.
//
//   ncentre solve     --config cfg.json --out DIR [--seed S] [--jobs K]
//   ncentre sweep-eps --config cfg.json --out DIR [--seed S] [--jobs K]
//   ncentre oracle    --config cfg.json --out DIR
//   ncentre lc-check  --config cfg.json --out DIR [--seed S] [--jobs K]
//
// Exit codes: 0 success, 1 a run failed or a check did not hold, 2 bad
// config or arguments (error JSON on stderr).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ncentre/errors.hpp"
#include "ncentre/experiment.hpp"
#include "ncentre/io.hpp"

namespace {

// Library config errors read "<json path>: <reason>".
int config_error(const std::string& code, const std::string& message) {
  nlohmann::json j{{"error", code}, {"message", message}};
  if (const auto colon = message.find(": "); colon != std::string::npos) j["field"] = message.substr(0, colon);
  std::cerr << j.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-energy N-centre experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool parallel) {
    sub->add_option("--config", config_path, "Experiment config (JSON, schema 1)")->required();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    if (parallel) sub->add_option("--jobs", jobs, "Independent runs in parallel")->check(CLI::PositiveNumber);
  };
  auto* solve = app.add_subcommand("solve", "Multi-start class-constrained minimization");
  auto* sweep = app.add_subcommand("sweep-eps", "Obstacle sweep d(epsilon)");
  auto* oracle = app.add_subcommand("oracle", "Blow-up angle quadrature vs closed form");
  auto* lc = app.add_subcommand("lc-check", "Levi-Civita checks on solve output");
  add_common(solve, true);
  add_common(sweep, true);
  add_common(oracle, false);
  add_common(lc, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return config_error("InvalidArguments", e.what());
  }

  ncentre::ExperimentConfig cfg;
  try {
    cfg = ncentre::experiment_from_json(ncentre::read_json(config_path));
  } catch (const ncentre::Error& e) {
    return config_error(std::string(ncentre::to_string(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return config_error("InvalidConfig", e.what());
  }
  if (seed) {
    cfg.seed = *seed;
    cfg.options.seed = *seed;
  }

  try {
    if (solve->parsed()) return ncentre::cmd_solve(cfg, out_dir, jobs);
    if (sweep->parsed()) return ncentre::cmd_sweep_eps(cfg, out_dir, jobs);
    if (oracle->parsed()) return ncentre::cmd_oracle(cfg, out_dir);
    return ncentre::cmd_lc_check(cfg, out_dir, jobs);
  } catch (const ncentre::Error& e) {
    if (e.code() == ncentre::ErrorCode::invalid_config) return config_error("InvalidConfig", e.what());
    std::cerr << nlohmann::json{{"error", std::string(ncentre::to_string(e.code()))}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  }
}
