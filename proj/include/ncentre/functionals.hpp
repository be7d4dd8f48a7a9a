#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

/// Discrete Maupertuis value M = K * P with K = kinetic_integral and
/// P = potential_integral (V + h, midpoint rule).
struct FunctionalValue {
  double value = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  /// P / K; only meaningful when both factors are positive.
  double omega_sq = 0.0;
  /// M <= 0: a critical point does not give a physical solution.
  bool non_positive_level = false;
  /// Midpoints outside the Hill region (V + h <= 0).
  int hill_violation_count = 0;
};

/// K + integral of V (midpoint rule); h plays no role.
double action(const DiscretePath& path, const PotentialSpec& spec, double delta = 0.0);

FunctionalValue maupertuis(const DiscretePath& path, const PotentialSpec& spec, double h, double delta = 0.0);

/// sum_i sqrt(V(mid_i) + h) |u_{i+1} - u_i|. Throws
/// Error(outside_hill_region) if some midpoint has V + h <= 0.
double jacobi_length(const DiscretePath& path, const PotentialSpec& spec, double h, double delta = 0.0);

/// Exact gradient of the discrete M with respect to the N - 1 interior nodes.
std::vector<Vec3> grad_maupertuis(const DiscretePath& path, const PotentialSpec& spec, double h,
                                  double delta = 0.0);

/// Gradients of the two factors separately (interior nodes only).
void grad_factors(const DiscretePath& path, const PotentialSpec& spec, double delta, std::vector<Vec3>& grad_k,
                  std::vector<Vec3>& grad_p);

/// Per segment: 1/2 |N (u_{i+1} - u_i)|^2 - (V(mid_i) + h) / omega_sq.
std::vector<double> energy_profile(const DiscretePath& path, const PotentialSpec& spec, double h, double omega_sq,
                                   double delta = 0.0);

/// P / K computed over the nodes i..j only, in the original time variable.
double omega_sq_on_interval(const DiscretePath& path, const PotentialSpec& spec, double h, int i, int j,
                            double delta = 0.0);

/// Physical trajectory x(t) = q(omega t): nodes at times t_i / omega, one
/// velocity per segment.
struct Trajectory {
  Mode mode = Mode::planar;
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<Vec3> segment_velocities;
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

/// Throws Error(non_positive_omega) unless omega_sq > 0 and finite.
Trajectory reparametrize(const DiscretePath& path, double omega_sq);

nlohmann::json to_json(const FunctionalValue& v);

}  // namespace ncentre
