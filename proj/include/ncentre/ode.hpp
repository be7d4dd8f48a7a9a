#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/functionals.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

struct IntegratorConfig {
  double relative_tolerance = 1e-12;
  double absolute_tolerance = 1e-12;
  /// 0 means unbounded.
  double max_step = 0.0;
  /// Integration halts when the distance to a centre drops below this.
  double collision_radius = 1e-6;
  /// Smallest accepted step, relative to max(1, |t|).
  double min_step = 1e-14;

  void validate() const;
};

struct PhaseState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct IntegrationResult {
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  bool collision_stop = false;
  double stop_time = 0.0;
  /// max |E(t) - E(0)| / max(1, |E(0)|) over the samples, E = |v|^2 / 2 - V.
  double energy_drift = 0.0;
  int steps = 0;
};

/// Dormand-Prince 5(4) with dense output for u'' = grad V(u). Samples at
/// `sample_times` (ascending, within [0, duration]); when empty, every
/// accepted step is recorded. Throws Error(step_underflow) if the step size
/// collapses; a collision is reported through collision_stop.
IntegrationResult integrate(const PotentialSpec& spec, const PhaseState& start, double duration,
                            const IntegratorConfig& cfg = {}, const std::vector<double>& sample_times = {});

struct VerificationReport {
  /// max_i |x(t_i) - u_i| between the integrated orbit and the minimizer's nodes.
  double max_deviation = 0.0;
  double path_diameter = 0.0;
  /// max over segments of |1/2 |x'|^2 - V(mid) - h| for the reparametrized
  /// minimizer (segment velocities times omega).
  double max_energy_residual = 0.0;
  /// Same quantity along the integrated orbit at the node times.
  double integrated_energy_residual = 0.0;
  double duration = 0.0;
  bool collision_stop = false;
};

/// Reparametrizes the minimizer by omega, starts the integrator from its
/// first node with the forward-difference velocity of its first segment, and
/// compares over the physical duration 1 / omega.
VerificationReport verify_minimizer(const DiscretePath& path, double omega_sq, const PotentialSpec& spec, double h,
                                    const IntegratorConfig& cfg = {});

nlohmann::json to_json(const VerificationReport& r);

}  // namespace ncentre
