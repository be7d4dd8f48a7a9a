#pragma once

#include <complex>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

using Complex = std::complex<double>;

/// A planar path in Levi-Civita coordinates about one centre: u - c = w^2,
/// dt = S |w|^2 dtau, with w sampled on the uniform tau-grid over [0, 1].
struct LCPath {
  std::vector<Complex> w;
  double S = 0.0;
  /// Sign of the seed square root at tau = 0.
  int branch = 1;
  Vec3 centre = Vec3::Zero();
  /// tau of each node of the source path (uniform t-grid), for mapping
  /// times between the two grids.
  std::vector<double> source_tau;

  int segments() const { return static_cast<int>(w.size()) - 1; }
};

/// Transforms `path` about centre k. S is the integral of dt / |u - c|
/// (fourth-order cumulative rule; segments close to the centre use the exact
/// straight-segment integral, and a segment ending on the centre the
/// rho ~ t^(2/3) collision law). The square root is continued from
/// branch * sqrt(u(0) - c) by nearest argument, and through the origin by
/// extrapolating the previous two values. w is resampled onto the uniform
/// tau-grid by cubic Lagrange interpolation.
///
/// Throws Error(alpha_mismatch) unless the centre has exponent 1,
/// Error(invalid_argument) for non-planar input, Error(distance_zero) if an
/// endpoint or a straight segment hits the centre away from a node, and
/// Error(branch_discontinuity) when consecutive roots turn by more than
/// pi/2 away from the centre (grid too coarse).
LCPath to_lc(const DiscretePath& path, const PotentialSpec& spec, int centre, int branch = 1);

/// u = w^2 + c on the uniform t-grid of the same size, with t(tau) from the
/// cumulative integral of S |w|^2 and the t-grid scaled to the total time.
DiscretePath from_lc(const LCPath& lc);

/// Total physical time S * integral |w|^2 dtau (1 for an exact transform).
double lc_total_time(const LCPath& lc);

/// tau at physical time t in [0, 1], interpolated from source_tau.
double lc_tau_at(const LCPath& lc, double t);

struct LCFunctional {
  double value = 0.0;
  /// integral |w'|^2 dtau
  double kinetic = 0.0;
  /// integral m + (V0(w^2 + c) + h) |w|^2 dtau
  double potential = 0.0;
  /// potential / (kinetic / 2)
  double omega_sq = 0.0;
};

/// 4 * kinetic * potential, where V0 is the potential with centre k's
/// singular term removed and m is that centre's mass. Both integrals are
/// fourth order (five-point derivatives, cubic cell rule) from N = 4 up, so
/// the comparison against M_h is limited by the latter's own O(1/N^2) error.
LCFunctional regularized_maupertuis(const LCPath& lc, const PotentialSpec& spec, double h, int centre);

/// Which right-hand side lc_ode_residual tests.
///  - displayed: omega^2 w'' = grad_w((V0(w^2) + h)|w|^2) - 2w
///  - euler_lagrange: omega^2 w'' = grad_w((V0(w^2) + h)|w|^2), the stationarity
///    condition of regularized_maupertuis with omega^2 = potential / (kinetic / 2).
enum class LCForm { displayed, euler_lagrange };

/// |omega^2 w''_j - rhs(w_j)| at interior nodes (central second differences);
/// size N - 1.
std::vector<double> lc_ode_residual(const LCPath& lc, double omega_tilde_sq, const PotentialSpec& spec, double h,
                                    int centre, LCForm form);

/// Scale for lc_ode_residual: max over interior nodes of max(|omega^2 w''|, |rhs|).
double lc_ode_scale(const LCPath& lc, double omega_tilde_sq, const PotentialSpec& spec, double h, int centre,
                    LCForm form);

/// True iff sup |w(tau1 + s) + w(tau1 - s)| <= tol * max |w| over the nodes
/// with both times in [0, 1] (reflected time linearly interpolated).
bool lc_symmetry_check(const LCPath& lc, double tau1, double tol);
/// The sup itself, relative to max |w|.
double lc_symmetry_defect(const LCPath& lc, double tau1);

struct LCDiagnostics {
  double S = 0.0;
  double max_roundtrip_error = 0.0;
  double Mh = 0.0;
  double Mtilde = 0.0;
  double ratio = 0.0;
  double total_time = 0.0;
};

/// Round trip and functional correspondence for one path.
LCDiagnostics lc_diagnostics(const DiscretePath& path, const PotentialSpec& spec, double h, int centre);

nlohmann::json to_json(const LCDiagnostics& d);

}  // namespace ncentre
