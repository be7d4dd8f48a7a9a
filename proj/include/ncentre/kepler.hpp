#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

/// Integral over (0, 1) of 1 / sqrt(xi^alpha - xi^2), the half-swing angle of
/// the zero-energy alpha-Kepler solution. Computed after the substitution
/// xi = eta^(2 / (2 - alpha)) followed by eta = 1 - s^2, which leaves a smooth
/// integrand on [0, 1]; the value is pi / (2 - alpha). Throws
/// Error(alpha_out_of_range) unless 0 < alpha < 2.
double parabolic_angle_quadrature(double alpha);

/// 2 pi / (2 - alpha): total angle swept by a parabolic solution, and the
/// collision-exclusion threshold for the requested winding angle.
double min_total_angle(double alpha);

/// Least-squares slope of log |u(t_i) - c| against log |t_i - t1| over nodes
/// whose distance lies in [2 * resolution, 0.3 * radius]. Throws
/// Error(insufficient_data) with fewer than 6 such nodes.
double fit_collision_exponent(const DiscretePath& path, const PotentialSpec& spec, int centre, double t1);

/// Per segment rho_i rho_{i+1} dtheta_i * N, the discrete rho^2 theta' about
/// `pole` in path time (xy components).
std::vector<double> angular_momentum_series(const DiscretePath& path, const Vec3& pole);

/// Ordinary least-squares slope of y against x.
double regression_slope(std::span<const double> x, std::span<const double> y);

struct BlowupReport {
  double alpha = 0.0;
  /// Angle swept about the centre by the arc inside its neighbourhood.
  double measured_angle = 0.0;
  double oracle_angle = 0.0;
  double fitted_exponent = 0.0;
  bool exponent_available = false;
  double oracle_exponent = 0.0;
  double min_distance = 0.0;
  /// Median of the angular-momentum series.
  double angular_momentum = 0.0;
  /// min_distance^((2 - alpha) / 2) * sqrt(2 m / (omega^2 alpha)), using the
  /// run's own omega^2 in place of the limit value.
  double oracle_angular_momentum = 0.0;
  double omega_sq = 0.0;
};

BlowupReport blowup_report(const DiscretePath& path, const PotentialSpec& spec, int centre, double omega_sq);

nlohmann::json to_json(const BlowupReport& r);

}  // namespace ncentre
