#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/functionals.hpp"
#include "ncentre/homotopy.hpp"
#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

struct MinimizeOptions {
  int max_iterations = 20000;
  /// Sup-norm of the gradient (over free interior nodes) at which a run
  /// counts as converged.
  double gradient_tolerance = 1e-8;
  /// Mollification schedule, as fractions of the scene diameter. Each stage
  /// multiplies delta by `annealing_factor`; the last stage is always the
  /// exact functional.
  double initial_delta = 1e-2;
  double annealing_factor = 0.5;
  double final_delta = 1e-6;
  double backtracking = 0.5;
  double sufficient_decrease = 1e-4;
  int lbfgs_memory = 8;
  std::uint64_t seed = 0;
  /// Collision threshold, fraction of the scene diameter.
  double collision_threshold = 1e-2;
  /// Reflection-symmetry tolerance, fraction of the path diameter.
  double symmetry_tolerance = 5e-2;
  /// Nodes closer than this (fraction of the scene diameter) to a centre are
  /// frozen there: the discrete functional is finite at a centre, so an
  /// attracting node would otherwise creep toward it forever.
  double pin_radius = 1e-9;

  void validate() const;
};

enum class Classification { collision_free, collision_ejection, obstacle_bound, unclassified };
const char* to_string(Classification c);

struct CentreApproach {
  int centre = -1;
  double min_distance = 0.0;
  double time = 0.0;
  bool below_threshold = false;
};

struct CollisionCandidate {
  int centre = -1;
  double time = 0.0;
  double distance = 0.0;
  int segment = -1;
};

struct CollisionReport {
  std::vector<CentreApproach> per_centre;
  std::vector<CollisionCandidate> candidates;
  double threshold = 0.0;
};

struct MinimizationResult {
  DiscretePath path;
  FunctionalValue value;
  double omega_sq = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<int> pinned_nodes;
  /// Obstacle runs only: some node sits on the obstacle circle.
  bool constraint_active = false;
  CollisionReport collisions;
  Classification classification = Classification::unclassified;
  std::string message;
};

struct ObstacleProblem {
  int centre = 0;
  double epsilon = 0.0;
};

/// Class-constrained local minimization of M_h with delta annealing and an
/// H^1-preconditioned L-BFGS iteration. Throws Error(class_violation_at_start)
/// when path0 is not in `cls`.
MinimizationResult minimize_in_class(const DiscretePath& path0, const HomotopyClass& cls,
                                     const PotentialSpec& spec, double h, const MinimizeOptions& opts = {});

/// Same, with every node kept at distance >= epsilon from the obstacle
/// centre by radial projection.
MinimizationResult obstacle_minimize(const DiscretePath& path0, const HomotopyClass& cls,
                                     const ObstacleProblem& obstacle, const PotentialSpec& spec, double h,
                                     const MinimizeOptions& opts = {});

struct SweepRow {
  double epsilon = 0.0;
  double value = 0.0;
  bool constraint_active = false;
  bool converged = false;
  double omega_sq = 0.0;
  std::optional<MinimizationResult> result;
  std::string error;
};

/// Independent obstacle runs, one per epsilon (run on `jobs` threads), sorted
/// by epsilon descending. Per-run failures are recorded in the row.
std::vector<SweepRow> sweep_d_of_eps(const DiscretePath& path0, const HomotopyClass& cls, int centre,
                                     std::vector<double> eps, const PotentialSpec& spec, double h,
                                     const MinimizeOptions& opts = {}, int jobs = 1);

/// Local minima of segment-to-centre distance below `threshold`; candidates
/// within 4 grid cells of each other are merged.
CollisionReport detect_collisions(const DiscretePath& path, const PotentialSpec& spec, double threshold);

/// sup |u(t1 + s) - u(t1 - s)| <= tol * diameter over node offsets s.
bool check_reflection_symmetry(const DiscretePath& path, double t1, double tol);

/// Collision count allowed by the class pattern (one at an alpha = 1 centre
/// whose parity differs from all others, or a pair of alpha = 1 centres
/// sharing a parity that differs from all the rest).
Classification classify(const MinimizationResult& result, const HomotopyClass& cls, const PotentialSpec& spec,
                        const MinimizeOptions& opts = {});

// ---------------------------------------------------------------------------
// Initial paths

/// Log-radius spiral about centre k sweeping `angle` radians from p1 to p2.
DiscretePath spiral_path(const Vec3& p1, const Vec3& p2, const Vec3& centre, double angle, int segments,
                         Mode mode = Mode::planar);

/// Straight base path with lasso loops (radial leg, circle, radial leg)
/// added around centres until the winding vector equals `indices`.
DiscretePath lasso_path(const PotentialSpec& spec, const Vec3& p1, const Vec3& p2, const ClosurePath& closure,
                        const std::vector<int>& indices, int segments);

/// Smooth sine perturbation of the interior with amplitude
/// `amplitude * diameter`, shrunk until the class is preserved.
DiscretePath perturb_in_class(const DiscretePath& path, const HomotopyClass& cls, const PotentialSpec& spec,
                              std::uint64_t seed, double amplitude);

nlohmann::json to_json(const CollisionReport& report);
nlohmann::json to_json(const MinimizationResult& result);
nlohmann::json to_json(const MinimizeOptions& opts);
MinimizeOptions minimize_options_from_json(const nlohmann::json& j, const std::string& at);

}  // namespace ncentre
