#include "ncentre/kepler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ncentre/errors.hpp"
#include "ncentre/homotopy.hpp"

namespace ncentre {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::alpha_out_of_range, "alpha must lie in (0, 2)");
}

}  // namespace

double parabolic_angle_quadrature(double alpha) {
  check_alpha(alpha);
  const double p = 2.0 / (2.0 - alpha);
  // xi = eta^p, eta = 1 - s^2. The original integrand times both Jacobians;
  // the differences that vanish at the endpoints are formed with log1p/expm1
  // so nothing cancels catastrophically.
  auto integrand = [&](double s) {
    // Endpoint limits (the quadrature rule never samples them).
    if (s <= 0.0) return std::numbers::sqrt2 * p;
    if (s >= 1.0) return 2.0 * p;
    const double s2 = s * s;
    const double log_eta = std::log1p(-s2);
    const double log_xi = p * log_eta;
    // xi^alpha - xi^2 = xi^alpha (1 - xi^(2 - alpha))
    const double gap = -std::expm1((2.0 - alpha) * log_xi);
    const double root = std::exp(0.5 * alpha * log_xi) * std::sqrt(gap);
    const double dxi_deta = p * std::exp((p - 1.0) * log_eta);
    const double deta_ds = 2.0 * s;
    return dxi_deta * deta_ds / root;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-15);
}

double min_total_angle(double alpha) {
  check_alpha(alpha);
  return 2.0 * std::numbers::pi / (2.0 - alpha);
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::insufficient_data, "need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw Error(ErrorCode::insufficient_data, "regressor has no spread");
  return sxy / sxx;
}

double fit_collision_exponent(const DiscretePath& path, const PotentialSpec& spec, int centre, double t1) {
  if (centre < 0 || static_cast<std::size_t>(centre) >= spec.size())
    throw Error(ErrorCode::invalid_argument, "centre index out of range");
  const Centre& c = spec.centre(static_cast<std::size_t>(centre));
  const double lo = 2.0 * path.resolution();
  const double hi = 0.3 * c.radius;
  std::vector<double> lx, ly;
  for (int i = 0; i <= path.segments(); ++i) {
    const double d = centre_distance(c, path.node(i));
    const double dt = std::abs(path.time(i) - t1);
    if (d < lo || d > hi || dt == 0.0) continue;
    lx.push_back(std::log(dt));
    ly.push_back(std::log(d));
  }
  if (lx.size() < 6) throw Error(ErrorCode::insufficient_data, "fewer than 6 nodes in the fit window");
  return regression_slope(lx, ly);
}

std::vector<double> angular_momentum_series(const DiscretePath& path, const Vec3& pole) {
  const int n = path.segments();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d a(path.node(i).x() - pole.x(), path.node(i).y() - pole.y());
    const Eigen::Vector2d b(path.node(i + 1).x() - pole.x(), path.node(i + 1).y() - pole.y());
    const double ra = a.norm(), rb = b.norm();
    if (ra == 0.0 || rb == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double dtheta = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    out[i] = ra * rb * dtheta * n;
  }
  return out;
}

BlowupReport blowup_report(const DiscretePath& path, const PotentialSpec& spec, int centre, double omega_sq) {
  if (centre < 0 || static_cast<std::size_t>(centre) >= spec.size())
    throw Error(ErrorCode::invalid_argument, "centre index out of range");
  const Centre& c = spec.centre(static_cast<std::size_t>(centre));
  check_alpha(c.exponent);
  BlowupReport r;
  r.alpha = c.exponent;
  r.oracle_angle = min_total_angle(c.exponent);
  r.oracle_exponent = 2.0 / (c.exponent + 2.0);
  r.omega_sq = omega_sq;

  const auto hit = min_distance_to(path, spec, centre);
  r.min_distance = hit.distance;

  // Arc inside the neighbourhood around the closest approach.
  const int n = path.segments();
  int i0 = hit.segment, i1 = hit.segment + 1;
  while (i0 > 0 && centre_distance(c, path.node(i0 - 1)) < c.radius) --i0;
  while (i1 < n && centre_distance(c, path.node(i1 + 1)) < c.radius) ++i1;
  std::span<const Vec3> arc(path.nodes().data() + i0, static_cast<std::size_t>(i1 - i0 + 1));
  try {
    r.measured_angle = std::abs(accumulated_angle_through_collisions(arc, c.position));
  } catch (const Error&) {
    r.measured_angle = std::numeric_limits<double>::quiet_NaN();
  }

  try {
    r.fitted_exponent = fit_collision_exponent(path, spec, centre, hit.time);
    r.exponent_available = true;
  } catch (const Error&) {
    r.exponent_available = false;
  }

  auto series = angular_momentum_series(path, c.position);
  for (auto& v : series) v = std::abs(v);
  std::nth_element(series.begin(), series.begin() + series.size() / 2, series.end());
  r.angular_momentum = series[series.size() / 2];
  if (omega_sq > 0.0)
    r.oracle_angular_momentum = std::pow(r.min_distance, 0.5 * (2.0 - c.exponent)) *
                                std::sqrt(2.0 * c.mass / (omega_sq * c.exponent));
  return r;
}

nlohmann::json to_json(const BlowupReport& r) {
  nlohmann::json j = {{"alpha", r.alpha},
                      {"measured_angle", r.measured_angle},
                      {"oracle_angle", r.oracle_angle},
                      {"oracle_exponent", r.oracle_exponent},
                      {"min_distance", r.min_distance},
                      {"angular_momentum", r.angular_momentum},
                      {"oracle_angular_momentum", r.oracle_angular_momentum},
                      {"omega_sq", r.omega_sq},
                      {"omega_note", "run omega used in place of the limit value"}};
  j["fitted_exponent"] = r.exponent_available ? nlohmann::json(r.fitted_exponent) : nlohmann::json(nullptr);
  return j;
}

}  // namespace ncentre
