#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace ncentre {

using Vec3 = Eigen::Vector3d;

/// Planar problems live in the z = 0 plane. In axisymmetric mode the single
/// centre is a singular line parallel to z through (x, y); every singular
/// distance is measured in the xy-plane in both modes.
enum class Mode { planar, axisymmetric3d };

/// A singular attractor contributing m / (alpha * rho^alpha) to V.
struct Centre {
  Vec3 position = Vec3::Zero();
  double mass = 1.0;
  double exponent = 1.0;
  double radius = 1.0;
};

struct GaussianBump {
  double amplitude = 0.0;
  double x = 0.0;
  double y = 0.0;
  double width = 1.0;
};

/// A bump in the meridian half-plane (rho, z); rho is measured from the axis
/// of the first centre, so the field depends on (x, y) only through rho.
struct RadialBump {
  double amplitude = 0.0;
  double rho = 0.0;
  double z = 0.0;
  double width = 1.0;
};

/// Bounded smooth background V0, restricted to a closed family so that
/// boundedness of value and gradient is checkable.
class BackgroundField {
 public:
  enum class Kind { zero, gaussian, radial };

  BackgroundField() = default;

  static BackgroundField zero();
  static BackgroundField gaussian(std::vector<GaussianBump> bumps);
  static BackgroundField radial(std::vector<RadialBump> bumps);

  Kind kind() const noexcept { return kind_; }
  const std::vector<GaussianBump>& gaussian_bumps() const noexcept { return gaussian_; }
  const std::vector<RadialBump>& radial_bumps() const noexcept { return radial_; }

  double value(const Vec3& q, const Vec3& axis) const;
  Vec3 gradient(const Vec3& q, const Vec3& axis) const;

  /// Upper bound on |grad V0| over all of space.
  double gradient_bound() const;
  /// Upper bound on |V0| over all of space.
  double value_bound() const;

 private:
  Kind kind_ = Kind::zero;
  std::vector<GaussianBump> gaussian_;
  std::vector<RadialBump> radial_;
};

class PotentialSpec {
 public:
  /// Throws Error(invalid_argument) when a centre violates its ranges, two
  /// neighbourhood balls overlap, or the mode/background combination is not
  /// allowed (axisymmetric mode needs exactly one axis and a zero or radial
  /// background).
  PotentialSpec(std::vector<Centre> centres, BackgroundField background = BackgroundField::zero(),
                Mode mode = Mode::planar);

  const std::vector<Centre>& centres() const noexcept { return centres_; }
  const Centre& centre(std::size_t k) const { return centres_.at(k); }
  std::size_t size() const noexcept { return centres_.size(); }
  const BackgroundField& background() const noexcept { return background_; }
  Mode mode() const noexcept { return mode_; }

  /// Axis used by radial background profiles (position of the first centre).
  const Vec3& axis() const noexcept { return centres_.front().position; }

  /// Copy with one centre's singular term removed from the sum. Used by the
  /// Levi-Civita module, where that term is handled analytically. The result
  /// is not validated as a standalone spec.
  PotentialSpec without_centre(std::size_t k) const;

  /// Copy with every mass multiplied by `factor`.
  PotentialSpec scaled_masses(double factor) const;

 private:
  PotentialSpec() = default;

  std::vector<Centre> centres_;
  BackgroundField background_;
  Mode mode_ = Mode::planar;
};

/// Planar distance from q to the centre (to the axis in axisymmetric mode).
double centre_distance(const Centre& c, const Vec3& q);

/// V(q) = sum_k m_k / (alpha_k |q - c_k|^alpha_k) + V0(q).
/// Throws Error(distance_zero) when q coincides with a centre.
double evaluate(const PotentialSpec& spec, const Vec3& q);

/// grad V with the attractive convention: each centre contributes
/// -m_k (q - c_k) / |q - c_k|^(alpha_k + 2).
Vec3 gradient(const PotentialSpec& spec, const Vec3& q);

/// Singular distances replaced by sqrt(dist^2 + delta^2). delta = 0 falls
/// back to the exact potential (and its DistanceZero error).
double evaluate_mollified(const PotentialSpec& spec, const Vec3& q, double delta);
Vec3 gradient_mollified(const PotentialSpec& spec, const Vec3& q, double delta);

/// True iff V(q) + h > 0.
bool hill_region_check(const PotentialSpec& spec, const Vec3& q, double h);

/// Sample points (dense grid over the box [lo, hi]) where |grad V| falls
/// below `tolerance`. A non-empty result warns that the motion equation may
/// admit stationary solutions; this cannot be verified constructively.
std::vector<Vec3> near_stationary_points(const PotentialSpec& spec, const Vec3& lo, const Vec3& hi,
                                         int samples_per_axis, double tolerance);

/// Max pairwise distance among the centres and the given extra points.
double scene_diameter(const PotentialSpec& spec, std::span<const Vec3> extra = {});

nlohmann::json to_json(const PotentialSpec& spec);
/// Field errors are raised as Error(invalid_config) with the offending JSON
/// path at the front of the message ("centres[0].mass: ...").
PotentialSpec potential_from_json(const nlohmann::json& j);

const char* to_string(Mode mode);

}  // namespace ncentre
