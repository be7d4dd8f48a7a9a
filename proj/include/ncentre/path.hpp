#pragma once

#include <span>
#include <string>
#include <vector>

#include "ncentre/potential.hpp"

namespace ncentre {

/// Piecewise-linear H^1 trial path on the uniform grid t_i = i / N over
/// [0, 1]. Node 0 and node N are the fixed endpoints. N is a power of two,
/// at least 8; planar paths keep z = 0.
class DiscretePath {
 public:
  DiscretePath(Mode mode, std::vector<Vec3> nodes);

  static DiscretePath straight(const Vec3& p1, const Vec3& p2, int segments, Mode mode = Mode::planar);

  Mode mode() const noexcept { return mode_; }
  int segments() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<Vec3>& nodes() const noexcept { return nodes_; }
  const Vec3& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const Vec3& start() const noexcept { return nodes_.front(); }
  const Vec3& end() const noexcept { return nodes_.back(); }
  double time(int i) const noexcept { return double(i) / segments(); }
  double spacing() const noexcept { return 1.0 / segments(); }

  /// Linear interpolation at t in [0, 1] (clamped).
  Vec3 at(double t) const;

  /// Replace an interior node. Endpoints are immutable.
  void set_interior(int i, const Vec3& value);

  double arclength() const;
  /// Mean segment length, the natural spatial resolution of the grid.
  double resolution() const { return arclength() / segments(); }
  /// Max distance between any two nodes.
  double diameter() const;

 private:
  Mode mode_;
  std::vector<Vec3> nodes_;
};

bool is_valid_segment_count(int n);

/// 1/2 * sum_i |u_{i+1} - u_i|^2 * N, the exact kinetic integral of the
/// piecewise-linear interpolant.
double kinetic_integral(const DiscretePath& path);

/// Midpoint rule sum_i (V_delta(mid_i) + h) / N.
double potential_integral(const DiscretePath& path, const PotentialSpec& spec, double h, double delta);

struct DistanceHit {
  double distance = 0.0;
  double time = 0.0;  ///< location of the minimum, possibly between nodes
  int centre = -1;
  int segment = -1;
};

/// Distance from point p to the segment [a, b] in the xy-plane, with the
/// segment parameter s in [0, 1] of the closest point.
double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p, double* param = nullptr);

/// Minimum over all segments of the distance to every centre.
DistanceHit min_distance(const DiscretePath& path, const PotentialSpec& spec);
/// Same, restricted to a single centre.
DistanceHit min_distance_to(const DiscretePath& path, const PotentialSpec& spec, int centre);

/// Midpoint insertion: 2N segments, same polyline image and endpoints.
DiscretePath refine(const DiscretePath& path);

/// Sub-path over [t_i, t_j], renormalised to [0, 1]. j - i must itself be a
/// valid segment count.
DiscretePath restrict(const DiscretePath& path, int i, int j);

/// Uniform resampling by arclength of an arbitrary polyline.
DiscretePath resample_polyline(std::span<const Vec3> polyline, int segments, Mode mode);

/// CSV with header t,x,y (planar) or t,x,y,z at node resolution, 17
/// significant digits, LF line endings.
std::string to_csv(const DiscretePath& path);
std::string to_csv(std::span<const double> times, std::span<const Vec3> points, Mode mode);

}  // namespace ncentre
