#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/minimizer.hpp"
#include "ncentre/ode.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

/// How the starting path is built.
struct InitialPathConfig {
  enum class Kind { spiral, lasso };
  Kind kind = Kind::spiral;
  /// spiral: centre to wind about and the swept angle (radians).
  int centre = 0;
  double angle = 0.0;
  /// lasso: winding index per centre.
  std::vector<int> indices;
};

struct ClassConfig {
  enum class Kind { inherit, indices, parities };
  /// inherit: exact indices read off the initial path.
  Kind kind = Kind::inherit;
  std::vector<int> values;
};

struct SweepConfig {
  int centre = 0;
  std::vector<double> epsilons;
  /// Known d(0), when available; adds a fit of log(d - d0) to the report.
  std::optional<double> d_limit;
};

struct LcConfig {
  /// Centre to regularize about; -1 picks the collision centre of each run
  /// (or centre 0 for collision-free runs).
  int centre = -1;
};

/// One experiment, schema 1. Everything a command needs, fully resolved.
struct ExperimentConfig {
  PotentialSpec potential{std::vector<Centre>{Centre{}}};
  Vec3 p1 = Vec3::Zero();
  Vec3 p2 = Vec3::Zero();
  double h = 0.0;
  int segments = 512;
  InitialPathConfig initial;
  ClassConfig cls;
  /// Multi-start: start 0 is the initial path, later starts are perturbed.
  int starts = 1;
  double perturbation = 0.05;
  std::uint64_t seed = 0;
  MinimizeOptions options;
  IntegratorConfig integrator;
  SweepConfig sweep;
  std::vector<double> oracle_alphas{0.1, 0.25, 0.5, 1.0, 4.0 / 3.0, 1.5, 1.9};
  LcConfig lc;
};

/// Throws Error(invalid_config) naming the offending field.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

DiscretePath initial_path(const ExperimentConfig& cfg);
HomotopyClass target_class(const ExperimentConfig& cfg, const DiscretePath& initial);

struct SolveRun {
  int start = 0;
  std::uint64_t seed = 0;
  std::optional<MinimizationResult> result;
  std::optional<VerificationReport> verification;
  /// Collision time of a collision-ejection run and its reflection check.
  std::optional<double> collision_time;
  bool reflection_symmetric = false;
  std::string error;
};

/// The multi-start minimization behind `solve` and `lc-check`.
std::vector<SolveRun> run_solve(const ExperimentConfig& cfg, int jobs);

int cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs);
int cmd_sweep_eps(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs);
int cmd_oracle(const ExperimentConfig& cfg, const std::filesystem::path& out);
int cmd_lc_check(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs);

}  // namespace ncentre
