#include "ncentre/potential.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "ncentre/errors.hpp"
#include "json_fields.hpp"

namespace ncentre {

namespace {

Eigen::Vector2d planar_offset(const Vec3& q, const Vec3& c) {
  return Eigen::Vector2d(q.x() - c.x(), q.y() - c.y());
}

void check_centre(const Centre& c, std::size_t k) {
  auto fail = [k](const std::string& what) {
    throw Error(ErrorCode::invalid_argument, "centre " + std::to_string(k) + ": " + what);
  };
  if (!c.position.allFinite()) fail("position must be finite");
  if (!(c.mass > 0.0) || !std::isfinite(c.mass)) fail("mass must be positive");
  if (!(c.exponent > 0.0 && c.exponent < 2.0)) fail("exponent must lie in (0, 2)");
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) fail("neighbourhood radius must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// BackgroundField

BackgroundField BackgroundField::zero() { return BackgroundField{}; }

BackgroundField BackgroundField::gaussian(std::vector<GaussianBump> bumps) {
  for (const auto& b : bumps) {
    if (!std::isfinite(b.amplitude) || !std::isfinite(b.x) || !std::isfinite(b.y) ||
        !(b.width > 0.0) || !std::isfinite(b.width))
      throw Error(ErrorCode::invalid_argument, "gaussian bump needs finite parameters and width > 0");
  }
  BackgroundField f;
  f.kind_ = Kind::gaussian;
  f.gaussian_ = std::move(bumps);
  return f;
}

BackgroundField BackgroundField::radial(std::vector<RadialBump> bumps) {
  for (const auto& b : bumps) {
    if (!std::isfinite(b.amplitude) || !std::isfinite(b.rho) || !std::isfinite(b.z) ||
        !(b.width > 0.0) || !std::isfinite(b.width))
      throw Error(ErrorCode::invalid_argument, "radial bump needs finite parameters and width > 0");
  }
  BackgroundField f;
  f.kind_ = Kind::radial;
  f.radial_ = std::move(bumps);
  return f;
}

double BackgroundField::value(const Vec3& q, const Vec3& axis) const {
  double v = 0.0;
  switch (kind_) {
    case Kind::zero:
      break;
    case Kind::gaussian:
      for (const auto& b : gaussian_) {
        const double dx = q.x() - b.x;
        const double dy = q.y() - b.y;
        v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
      }
      break;
    case Kind::radial: {
      const double rho = planar_offset(q, axis).norm();
      for (const auto& b : radial_) {
        const double dr = rho - b.rho;
        const double dz = q.z() - b.z;
        v += b.amplitude * std::exp(-(dr * dr + dz * dz) / (2.0 * b.width * b.width));
      }
      break;
    }
  }
  return v;
}

Vec3 BackgroundField::gradient(const Vec3& q, const Vec3& axis) const {
  Vec3 g = Vec3::Zero();
  switch (kind_) {
    case Kind::zero:
      break;
    case Kind::gaussian:
      for (const auto& b : gaussian_) {
        const double dx = q.x() - b.x;
        const double dy = q.y() - b.y;
        const double s2 = b.width * b.width;
        const double e = b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
        g.x() -= e * dx / s2;
        g.y() -= e * dy / s2;
      }
      break;
    case Kind::radial: {
      const Eigen::Vector2d u = planar_offset(q, axis);
      const double rho = u.norm();
      // d rho / d u is undefined on the axis itself; the axis is singular for
      // V anyway, so the radial direction is simply dropped there.
      const Eigen::Vector2d e_rho = rho > 0.0 ? Eigen::Vector2d(u / rho) : Eigen::Vector2d::Zero();
      for (const auto& b : radial_) {
        const double dr = rho - b.rho;
        const double dz = q.z() - b.z;
        const double s2 = b.width * b.width;
        const double e = b.amplitude * std::exp(-(dr * dr + dz * dz) / (2.0 * s2));
        g.x() -= e * dr / s2 * e_rho.x();
        g.y() -= e * dr / s2 * e_rho.y();
        g.z() -= e * dz / s2;
      }
      break;
    }
  }
  return g;
}

double BackgroundField::gradient_bound() const {
  // |d/dr A exp(-r^2 / 2s^2)| peaks at r = s with value |A| e^{-1/2} / s.
  double bound = 0.0;
  for (const auto& b : gaussian_) bound += std::abs(b.amplitude) * std::exp(-0.5) / b.width;
  for (const auto& b : radial_) bound += std::abs(b.amplitude) * std::exp(-0.5) / b.width;
  return bound;
}

double BackgroundField::value_bound() const {
  double bound = 0.0;
  for (const auto& b : gaussian_) bound += std::abs(b.amplitude);
  for (const auto& b : radial_) bound += std::abs(b.amplitude);
  return bound;
}

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec::PotentialSpec(std::vector<Centre> centres, BackgroundField background, Mode mode)
    : centres_(std::move(centres)), background_(std::move(background)), mode_(mode) {
  if (centres_.empty()) throw Error(ErrorCode::invalid_argument, "at least one centre is required");
  for (std::size_t k = 0; k < centres_.size(); ++k) {
    check_centre(centres_[k], k);
    if (mode_ == Mode::planar && centres_[k].position.z() != 0.0)
      throw Error(ErrorCode::invalid_argument, "planar centres must have z = 0");
  }
  for (std::size_t i = 0; i < centres_.size(); ++i) {
    for (std::size_t j = i + 1; j < centres_.size(); ++j) {
      const double d = planar_offset(centres_[i].position, centres_[j].position).norm();
      if (d < centres_[i].radius + centres_[j].radius) {
        std::ostringstream os;
        os << "neighbourhoods of centres " << i << " and " << j << " overlap";
        throw Error(ErrorCode::invalid_argument, os.str());
      }
    }
  }
  if (mode_ == Mode::axisymmetric3d) {
    if (centres_.size() != 1)
      throw Error(ErrorCode::invalid_argument, "axisymmetric mode allows exactly one singular axis");
    if (background_.kind() == BackgroundField::Kind::gaussian)
      throw Error(ErrorCode::invalid_argument,
                  "axisymmetric mode needs a background depending on (|u|, z) only");
  }
}

PotentialSpec PotentialSpec::without_centre(std::size_t k) const {
  PotentialSpec copy;
  copy.background_ = background_;
  copy.mode_ = mode_;
  // The axis for radial profiles must survive removal of the first centre.
  copy.centres_ = centres_;
  copy.centres_.at(k).mass = 0.0;
  return copy;
}

PotentialSpec PotentialSpec::scaled_masses(double factor) const {
  auto centres = centres_;
  for (auto& c : centres) c.mass *= factor;
  return PotentialSpec(std::move(centres), background_, mode_);
}

// ---------------------------------------------------------------------------
// Evaluation

double centre_distance(const Centre& c, const Vec3& q) { return planar_offset(q, c.position).norm(); }

double evaluate(const PotentialSpec& spec, const Vec3& q) { return evaluate_mollified(spec, q, 0.0); }

Vec3 gradient(const PotentialSpec& spec, const Vec3& q) { return gradient_mollified(spec, q, 0.0); }

double evaluate_mollified(const PotentialSpec& spec, const Vec3& q, double delta) {
  double v = spec.background().value(q, spec.axis());
  const double d2 = delta * delta;
  for (const auto& c : spec.centres()) {
    if (c.mass == 0.0) continue;
    const double r2 = planar_offset(q, c.position).squaredNorm() + d2;
    if (r2 == 0.0) throw Error(ErrorCode::distance_zero, "point coincides with a centre");
    v += c.mass / (c.exponent * std::pow(r2, 0.5 * c.exponent));
  }
  return v;
}

Vec3 gradient_mollified(const PotentialSpec& spec, const Vec3& q, double delta) {
  Vec3 g = spec.background().gradient(q, spec.axis());
  const double d2 = delta * delta;
  for (const auto& c : spec.centres()) {
    if (c.mass == 0.0) continue;
    const Eigen::Vector2d u = planar_offset(q, c.position);
    const double r2 = u.squaredNorm() + d2;
    if (r2 == 0.0) throw Error(ErrorCode::distance_zero, "point coincides with a centre");
    const double f = c.mass * std::pow(r2, -0.5 * c.exponent - 1.0);
    g.x() -= f * u.x();
    g.y() -= f * u.y();
  }
  return g;
}

bool hill_region_check(const PotentialSpec& spec, const Vec3& q, double h) {
  return evaluate(spec, q) + h > 0.0;
}

std::vector<Vec3> near_stationary_points(const PotentialSpec& spec, const Vec3& lo, const Vec3& hi,
                                         int samples_per_axis, double tolerance) {
  std::vector<Vec3> hits;
  const int nz = spec.mode() == Mode::planar ? 1 : samples_per_axis;
  for (int i = 0; i < samples_per_axis; ++i) {
    for (int j = 0; j < samples_per_axis; ++j) {
      for (int l = 0; l < nz; ++l) {
        auto lerp = [&](int a, int idx) {
          const double s = samples_per_axis > 1 ? double(idx) / (samples_per_axis - 1) : 0.5;
          return lo[a] + s * (hi[a] - lo[a]);
        };
        Vec3 q(lerp(0, i), lerp(1, j), spec.mode() == Mode::planar ? 0.0 : lerp(2, l));
        bool at_centre = false;
        for (const auto& c : spec.centres()) at_centre |= centre_distance(c, q) == 0.0;
        if (at_centre) continue;
        if (gradient(spec, q).norm() < tolerance) hits.push_back(q);
      }
    }
  }
  return hits;
}

double scene_diameter(const PotentialSpec& spec, std::span<const Vec3> extra) {
  std::vector<Vec3> pts;
  for (const auto& c : spec.centres()) pts.push_back(c.position);
  pts.insert(pts.end(), extra.begin(), extra.end());
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  if (d == 0.0) {
    for (const auto& c : spec.centres()) d = std::max(d, c.radius);
  }
  return d;
}

const char* to_string(Mode mode) { return mode == Mode::planar ? "planar" : "axisymmetric3d"; }

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const PotentialSpec& spec) {
  using nlohmann::json;
  json centres = json::array();
  for (const auto& c : spec.centres()) {
    json jc = {{"x", c.position.x()}, {"y", c.position.y()}, {"mass", c.mass},
               {"alpha", c.exponent}, {"radius", c.radius}};
    if (spec.mode() == Mode::axisymmetric3d) jc["z_axis"] = true;
    centres.push_back(std::move(jc));
  }
  json params = json::object();
  const auto& bg = spec.background();
  std::string kind = "zero";
  if (bg.kind() == BackgroundField::Kind::gaussian) {
    kind = "gaussian";
    json bumps = json::array();
    for (const auto& b : bg.gaussian_bumps())
      bumps.push_back({{"amplitude", b.amplitude}, {"x", b.x}, {"y", b.y}, {"width", b.width}});
    params["bumps"] = std::move(bumps);
  } else if (bg.kind() == BackgroundField::Kind::radial) {
    kind = "radial";
    json bumps = json::array();
    for (const auto& b : bg.radial_bumps())
      bumps.push_back({{"amplitude", b.amplitude}, {"rho", b.rho}, {"z", b.z}, {"width", b.width}});
    params["bumps"] = std::move(bumps);
  }
  return {{"mode", to_string(spec.mode())},
          {"centres", std::move(centres)},
          {"background", {{"kind", kind}, {"params", std::move(params)}}}};
}

PotentialSpec potential_from_json(const nlohmann::json& j) {
  using detail::field_number;
  using detail::require;
  require(j.is_object(), "potential", "expected an object");

  Mode mode = Mode::planar;
  if (j.contains("mode")) {
    const auto& m = j.at("mode");
    require(m.is_string(), "mode", "expected a string");
    const auto s = m.get<std::string>();
    if (s == "planar") mode = Mode::planar;
    else if (s == "axisymmetric3d") mode = Mode::axisymmetric3d;
    else detail::fail("mode", "unknown mode '" + s + "'");
  }

  require(j.contains("centres"), "centres", "missing field");
  const auto& jc = j.at("centres");
  require(jc.is_array() && !jc.empty(), "centres", "expected a non-empty array");
  std::vector<Centre> centres;
  for (std::size_t k = 0; k < jc.size(); ++k) {
    const std::string at = "centres[" + std::to_string(k) + "]";
    const auto& c = jc[k];
    require(c.is_object(), at, "expected an object");
    Centre centre;
    centre.position = Vec3(field_number(c, "x", at), field_number(c, "y", at), 0.0);
    centre.mass = field_number(c, "mass", at);
    centre.exponent = field_number(c, "alpha", at);
    centre.radius = field_number(c, "radius", at);
    if (c.contains("z_axis")) {
      require(c.at("z_axis").is_boolean(), at + ".z_axis", "expected a boolean");
    }
    require(centre.mass > 0.0, at + ".mass", "must be positive");
    require(centre.exponent > 0.0 && centre.exponent < 2.0, at + ".alpha", "must lie in (0, 2)");
    require(centre.radius > 0.0, at + ".radius", "must be positive");
    centres.push_back(centre);
  }

  BackgroundField background = BackgroundField::zero();
  if (j.contains("background")) {
    const auto& jb = j.at("background");
    require(jb.is_object(), "background", "expected an object");
    const std::string kind = jb.contains("kind") ? jb.at("kind").get<std::string>() : "zero";
    const nlohmann::json params = jb.contains("params") ? jb.at("params") : nlohmann::json::object();
    const nlohmann::json bumps =
        params.contains("bumps") ? params.at("bumps") : nlohmann::json::array();
    require(bumps.is_array(), "background.params.bumps", "expected an array");
    if (kind == "zero") {
    } else if (kind == "gaussian") {
      std::vector<GaussianBump> list;
      for (std::size_t i = 0; i < bumps.size(); ++i) {
        const std::string at = "background.params.bumps[" + std::to_string(i) + "]";
        list.push_back({field_number(bumps[i], "amplitude", at), field_number(bumps[i], "x", at),
                        field_number(bumps[i], "y", at), field_number(bumps[i], "width", at)});
        require(list.back().width > 0.0, at + ".width", "must be positive");
      }
      background = BackgroundField::gaussian(std::move(list));
    } else if (kind == "radial") {
      std::vector<RadialBump> list;
      for (std::size_t i = 0; i < bumps.size(); ++i) {
        const std::string at = "background.params.bumps[" + std::to_string(i) + "]";
        list.push_back({field_number(bumps[i], "amplitude", at), field_number(bumps[i], "rho", at),
                        field_number(bumps[i], "z", at), field_number(bumps[i], "width", at)});
        require(list.back().width > 0.0, at + ".width", "must be positive");
      }
      background = BackgroundField::radial(std::move(list));
    } else {
      detail::fail("background.kind", "unknown background kind '" + kind + "'");
    }
  }

  try {
    return PotentialSpec(std::move(centres), std::move(background), mode);
  } catch (const Error& e) {
    detail::fail("centres", e.what());
  }
}

}  // namespace ncentre
