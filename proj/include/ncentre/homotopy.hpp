#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace ncentre {

/// Counter-clockwise angle in [0, 2pi) from the ray pole->p1 to the ray
/// pole->p2 (xy-plane). Throws Error(pole_coincidence).
double angle_between(const Vec3& p1, const Vec3& p2, const Vec3& pole);

/// Signed angle swept about `pole` along a polyline: each straight segment
/// contributes its exact increment in (-pi, pi]. Throws
/// Error(segment_through_pole) if a segment passes within 1e-12 of the pole.
double accumulated_angle(std::span<const Vec3> polyline, const Vec3& pole);
double accumulated_angle(const DiscretePath& path, const Vec3& pole);

/// Winding contribution of an interior node lying exactly on `pole` (a
/// collision node), from its neighbours prev and next: the path is read as
/// turning around the pole the long way, opposite the side where the
/// neighbours meet. Throws Error(segment_through_pole) when the neighbours
/// are aligned (same or opposite direction), where the side is ambiguous.
double collision_node_angle(const Vec3& prev, const Vec3& next, const Vec3& pole);

/// accumulated_angle, except that interior collision nodes are allowed and
/// contribute collision_node_angle for their two segments. Used to measure
/// the angle swept through a collision-ejection.
double accumulated_angle_through_collisions(std::span<const Vec3> polyline, const Vec3& pole);

/// Reference arc from p2 back to p1 used to close open paths before taking
/// winding numbers.
class ClosurePath {
 public:
  explicit ClosurePath(std::vector<Vec3> waypoints);

  /// p2 -> far point -> p1, where the far point sits 2 * (scene diameter)
  /// from the centroid of the centres, in whichever of 32 fixed directions
  /// keeps the two legs furthest from every centre.
  static ClosurePath canonical(const PotentialSpec& spec, const Vec3& p1, const Vec3& p2);

  const std::vector<Vec3>& waypoints() const noexcept { return waypoints_; }
  const Vec3& from() const noexcept { return waypoints_.front(); }
  const Vec3& to() const noexcept { return waypoints_.back(); }

 private:
  std::vector<Vec3> waypoints_;
};

/// Winding numbers of path + closure about `pole` compatible with the path.
/// Without collision nodes lo == hi. A collision node can be resolved to
/// either side of the pole, so each one widens the range by one turn (two
/// when its neighbours point the same way).
struct IndexRange {
  int lo = 0;
  int hi = 0;
  bool exact() const noexcept { return lo == hi; }
};

/// Throws Error(invalid_argument) if the closure does not join p2 to p1, and
/// Error(non_integer_residual) if the total angle is not within 1e-6 of a
/// multiple of 2pi.
IndexRange index_range(const DiscretePath& path, const ClosurePath& closure, const Vec3& pole);
IndexRange index_range(std::span<const Vec3> polyline, const ClosurePath& closure, const Vec3& pole);

/// The winding number when it is unambiguous; a collision node throws
/// Error(segment_through_pole). Other errors as index_range.
int closed_index(const DiscretePath& path, const ClosurePath& closure, const Vec3& pole);
int closed_index(std::span<const Vec3> polyline, const ClosurePath& closure, const Vec3& pole);

std::vector<int> winding_vector(const DiscretePath& path, const ClosurePath& closure,
                                const PotentialSpec& spec);
/// Componentwise closed_index mod 2, values in {0, 1}.
std::vector<int> parity_class(const DiscretePath& path, const ClosurePath& closure,
                              const PotentialSpec& spec);

struct WindingConstraint {
  enum class Kind { free, index, parity };
  Kind kind = Kind::free;
  int value = 0;

  static WindingConstraint exact(int index) { return {Kind::index, index}; }
  static WindingConstraint parity(int bit) { return {Kind::parity, ((bit % 2) + 2) % 2}; }
  bool accepts(int index) const;
};

/// Per-centre winding constraints (exact index or parity) together with the
/// closure that defines the indices.
class HomotopyClass {
 public:
  HomotopyClass(std::vector<WindingConstraint> constraints, ClosurePath closure);

  /// Parity class for every centre.
  static HomotopyClass parities(std::span<const int> bits, ClosurePath closure);
  /// Exact index for every centre.
  static HomotopyClass indices(std::span<const int> values, ClosurePath closure);

  const std::vector<WindingConstraint>& constraints() const noexcept { return constraints_; }
  const ClosurePath& closure() const noexcept { return closure_; }

  bool contains(const DiscretePath& path, const PotentialSpec& spec) const;
  /// True when every constraint is a parity bit.
  bool is_parity() const;
  std::vector<int> parity_bits() const;

 private:
  std::vector<WindingConstraint> constraints_;
  ClosurePath closure_;
};

/// True iff sliding every node linearly from `old_path` to `new_path` never
/// drags a segment across a centre and the new path still lies in `cls`.
/// A path with a collision node lies in `cls` when some reading of its
/// index range does.
bool step_preserves_class(const DiscretePath& old_path, const DiscretePath& new_path,
                          const HomotopyClass& cls, const PotentialSpec& spec);
/// Crossing test alone (no class recomputation).
bool sweep_crosses_centre(std::span<const Vec3> old_nodes, std::span<const Vec3> new_nodes,
                          const PotentialSpec& spec);

nlohmann::json to_json(const ClosurePath& closure);
nlohmann::json to_json(const HomotopyClass& cls);

}  // namespace ncentre
