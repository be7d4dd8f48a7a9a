#pragma once

// Preconditioned L-BFGS on the interior nodes of a discrete path, with every
// trial step screened by the homotopy guard.

#include <optional>
#include <vector>

#include "ncentre/homotopy.hpp"
#include "ncentre/minimizer.hpp"

namespace ncentre::detail {

struct DescentSetup {
  const PotentialSpec* spec = nullptr;
  const HomotopyClass* cls = nullptr;
  double h = 0.0;
  double delta = 0.0;
  double tolerance = 1e-8;
  int max_iterations = 1000;
  std::optional<ObstacleProblem> obstacle;
  double pin_radius = 0.0;  // absolute
};

struct DescentOutcome {
  std::vector<Vec3> nodes;
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<char> pinned;  // per node, endpoints included
};

/// `pinned` (per node) carries frozen nodes between annealing stages.
DescentOutcome descend(const DiscretePath& start, const DescentSetup& setup, const MinimizeOptions& opts,
                       std::vector<char> pinned);

/// Sup-norm of the reduced gradient (pinned nodes and obstacle-active
/// inward components removed).
double reduced_gradient_norm(const DiscretePath& path, const DescentSetup& setup, const std::vector<char>& pinned);

/// Moves every node closer than epsilon to the obstacle centre radially out
/// to epsilon. Returns true if any node moved.
bool project_obstacle(std::vector<Vec3>& nodes, const PotentialSpec& spec, const ObstacleProblem& obstacle);

}  // namespace ncentre::detail
