#include "ncentre/functionals.hpp"

#include <cmath>

#include "ncentre/errors.hpp"

namespace ncentre {

namespace {

Vec3 midpoint(const std::vector<Vec3>& u, std::size_t i) { return 0.5 * (u[i] + u[i + 1]); }

}  // namespace

double action(const DiscretePath& path, const PotentialSpec& spec, double delta) {
  return kinetic_integral(path) + potential_integral(path, spec, 0.0, delta);
}

FunctionalValue maupertuis(const DiscretePath& path, const PotentialSpec& spec, double h, double delta) {
  FunctionalValue out;
  const auto& u = path.nodes();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double w = evaluate_mollified(spec, midpoint(u, i), delta) + h;
    if (!(w > 0.0)) ++out.hill_violation_count;
    sum += w;
  }
  out.kinetic = kinetic_integral(path);
  out.potential = sum / path.segments();
  out.value = out.kinetic * out.potential;
  out.omega_sq = out.kinetic > 0.0 ? out.potential / out.kinetic : 0.0;
  out.non_positive_level = !(out.value > 0.0);
  return out;
}

double jacobi_length(const DiscretePath& path, const PotentialSpec& spec, double h, double delta) {
  const auto& u = path.nodes();
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double w = evaluate_mollified(spec, midpoint(u, i), delta) + h;
    if (!(w > 0.0)) throw Error(ErrorCode::outside_hill_region, "path leaves the Hill region");
    len += std::sqrt(w) * (u[i + 1] - u[i]).norm();
  }
  return len;
}

void grad_factors(const DiscretePath& path, const PotentialSpec& spec, double delta, std::vector<Vec3>& grad_k,
                  std::vector<Vec3>& grad_p) {
  const auto& u = path.nodes();
  const int n = path.segments();
  std::vector<Vec3> gmid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gmid[i] = gradient_mollified(spec, midpoint(u, i), delta);
  grad_k.assign(static_cast<std::size_t>(n - 1), Vec3::Zero());
  grad_p.assign(static_cast<std::size_t>(n - 1), Vec3::Zero());
  for (int j = 1; j < n; ++j) {
    grad_k[j - 1] = double(n) * ((u[j] - u[j - 1]) - (u[j + 1] - u[j]));
    grad_p[j - 1] = (gmid[j - 1] + gmid[j]) / (2.0 * n);
  }
  if (path.mode() == Mode::planar) {
    for (auto& g : grad_k) g.z() = 0.0;
    for (auto& g : grad_p) g.z() = 0.0;
  }
}

std::vector<Vec3> grad_maupertuis(const DiscretePath& path, const PotentialSpec& spec, double h, double delta) {
  std::vector<Vec3> gk, gp;
  grad_factors(path, spec, delta, gk, gp);
  const double k = kinetic_integral(path);
  const double p = potential_integral(path, spec, h, delta);
  for (std::size_t j = 0; j < gk.size(); ++j) gk[j] = p * gk[j] + k * gp[j];
  return gk;
}

std::vector<double> energy_profile(const DiscretePath& path, const PotentialSpec& spec, double h, double omega_sq,
                                   double delta) {
  if (!(omega_sq > 0.0)) throw Error(ErrorCode::non_positive_omega, "omega_sq must be positive");
  const auto& u = path.nodes();
  const int n = path.segments();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double speed2 = (double(n) * (u[i + 1] - u[i])).squaredNorm();
    out[i] = 0.5 * speed2 - (evaluate_mollified(spec, midpoint(u, i), delta) + h) / omega_sq;
  }
  return out;
}

double omega_sq_on_interval(const DiscretePath& path, const PotentialSpec& spec, double h, int i, int j,
                            double delta) {
  const int n = path.segments();
  if (i < 0 || j > n || j <= i) throw Error(ErrorCode::invalid_argument, "interval needs 0 <= i < j <= N");
  const auto& u = path.nodes();
  double k = 0.0, p = 0.0;
  for (int s = i; s < j; ++s) {
    k += (u[s + 1] - u[s]).squaredNorm();
    p += evaluate_mollified(spec, midpoint(u, s), delta) + h;
  }
  k *= 0.5 * n;
  p /= n;
  if (!(k > 0.0)) throw Error(ErrorCode::non_positive_omega, "path is constant on the interval");
  return p / k;
}

Trajectory reparametrize(const DiscretePath& path, double omega_sq) {
  if (!(omega_sq > 0.0) || !std::isfinite(omega_sq))
    throw Error(ErrorCode::non_positive_omega, "omega_sq must be positive and finite");
  const double omega = std::sqrt(omega_sq);
  const int n = path.segments();
  Trajectory tr;
  tr.mode = path.mode();
  tr.positions = path.nodes();
  tr.times.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) tr.times[i] = path.time(i) / omega;
  tr.segment_velocities.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) tr.segment_velocities[i] = (omega * n) * (path.node(i + 1) - path.node(i));
  return tr;
}

nlohmann::json to_json(const FunctionalValue& v) {
  return {{"value", v.value},
          {"kinetic", v.kinetic},
          {"potential", v.potential},
          {"omega_sq", v.omega_sq},
          {"hill_violation_count", v.hill_violation_count}};
}

}  // namespace ncentre
