#include "ncentre/homotopy.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "ncentre/errors.hpp"

namespace ncentre {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPoleTolerance = 1e-12;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

Eigen::Vector2d xy(const Vec3& v) { return {v.x(), v.y()}; }

bool on_pole(const Vec3& q, const Vec3& pole) { return q.x() == pole.x() && q.y() == pole.y(); }

double segment_increment(const Vec3& a, const Vec3& b, const Vec3& pole) {
  if (segment_point_distance(a, b, pole) < kPoleTolerance)
    throw Error(ErrorCode::segment_through_pole, "segment passes through a pole");
  const Eigen::Vector2d ra = xy(a) - xy(pole);
  const Eigen::Vector2d rb = xy(b) - xy(pole);
  return std::atan2(cross2(ra, rb), ra.dot(rb));
}

}  // namespace

double angle_between(const Vec3& p1, const Vec3& p2, const Vec3& pole) {
  const Eigen::Vector2d r1 = xy(p1) - xy(pole);
  const Eigen::Vector2d r2 = xy(p2) - xy(pole);
  if (r1.squaredNorm() == 0.0 || r2.squaredNorm() == 0.0)
    throw Error(ErrorCode::pole_coincidence, "point coincides with the pole");
  double a = std::atan2(cross2(r1, r2), r1.dot(r2));
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

double accumulated_angle(std::span<const Vec3> polyline, const Vec3& pole) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
    total += segment_increment(polyline[i], polyline[i + 1], pole);
  return total;
}

double accumulated_angle(const DiscretePath& path, const Vec3& pole) {
  return accumulated_angle(std::span<const Vec3>(path.nodes()), pole);
}

double collision_node_angle(const Vec3& prev, const Vec3& next, const Vec3& pole) {
  const Eigen::Vector2d a = xy(prev) - xy(pole);
  const Eigen::Vector2d b = xy(next) - xy(pole);
  if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0)
    throw Error(ErrorCode::segment_through_pole, "consecutive nodes on a pole");
  const double phi = std::atan2(cross2(a, b), a.dot(b));
  if (std::abs(phi) < 1e-14 || std::abs(phi) > std::numbers::pi - 1e-14)
    throw Error(ErrorCode::segment_through_pole, "collision node with ambiguous side");
  return phi > 0.0 ? phi - kTwoPi : phi + kTwoPi;
}

double accumulated_angle_through_collisions(std::span<const Vec3> polyline, const Vec3& pole) {
  const std::size_t n = polyline.size();
  if (n > 0 && (on_pole(polyline.front(), pole) || on_pole(polyline.back(), pole)))
    throw Error(ErrorCode::segment_through_pole, "path endpoint on a pole");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i + 2 < n && on_pole(polyline[i + 1], pole)) {
      total += collision_node_angle(polyline[i], polyline[i + 2], pole);
      ++i;  // both segments touching the collision node are accounted for
      continue;
    }
    total += segment_increment(polyline[i], polyline[i + 1], pole);
  }
  return total;
}

// ---------------------------------------------------------------------------

ClosurePath::ClosurePath(std::vector<Vec3> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) throw Error(ErrorCode::invalid_argument, "closure needs at least two waypoints");
  for (const auto& w : waypoints_)
    if (!w.allFinite()) throw Error(ErrorCode::invalid_argument, "closure waypoints must be finite");
}

ClosurePath ClosurePath::canonical(const PotentialSpec& spec, const Vec3& p1, const Vec3& p2) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& c : spec.centres()) centroid += c.position;
  centroid /= double(spec.size());
  centroid.z() = 0.5 * (p1.z() + p2.z());
  const std::array<Vec3, 2> ends{p1, p2};
  const double far = 2.0 * scene_diameter(spec, ends);

  constexpr int kDirections = 32;
  double best_margin = -1.0;
  Vec3 best = centroid;
  for (int k = 0; k < kDirections; ++k) {
    const double phi = kTwoPi * k / kDirections;
    const Vec3 f = centroid + far * Vec3(std::cos(phi), std::sin(phi), 0.0);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& c : spec.centres()) {
      margin = std::min(margin, segment_point_distance(p2, f, c.position));
      margin = std::min(margin, segment_point_distance(f, p1, c.position));
    }
    if (margin > best_margin) {
      best_margin = margin;
      best = f;
    }
  }
  if (!(best_margin > kPoleTolerance))
    throw Error(ErrorCode::invalid_argument, "no closure direction avoids the centres");
  return ClosurePath({p2, best, p1});
}

IndexRange index_range(std::span<const Vec3> polyline, const ClosurePath& closure, const Vec3& pole) {
  if (polyline.empty() || closure.from() != polyline.back() || closure.to() != polyline.front())
    throw Error(ErrorCode::invalid_argument, "closure must run from the path's end back to its start");
  const std::size_t n = polyline.size();
  if (on_pole(polyline.front(), pole) || on_pole(polyline.back(), pole))
    throw Error(ErrorCode::segment_through_pole, "path endpoint on a pole");
  // Collision nodes enter with their short-way angle; each one may also be
  // read one turn the other way, which widens the range.
  double total = 0.0;
  int widen_lo = 0, widen_hi = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i + 2 < n && on_pole(polyline[i + 1], pole)) {
      const Eigen::Vector2d a = xy(polyline[i]) - xy(pole);
      const Eigen::Vector2d b = xy(polyline[i + 2]) - xy(pole);
      if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0)
        throw Error(ErrorCode::segment_through_pole, "consecutive nodes on a pole");
      const double phi = std::atan2(cross2(a, b), a.dot(b));
      if (std::abs(phi) < 1e-14) {
        --widen_lo;
        ++widen_hi;
      } else if (std::abs(phi) > std::numbers::pi - 1e-14) {
        total += std::numbers::pi;
        --widen_lo;
      } else {
        total += phi;
        if (phi > 0.0) --widen_lo;
        else ++widen_hi;
      }
      ++i;
      continue;
    }
    total += segment_increment(polyline[i], polyline[i + 1], pole);
  }
  total += accumulated_angle(std::span<const Vec3>(closure.waypoints()), pole);
  const double turns = total / kTwoPi;
  const double index = std::round(turns);
  if (std::abs(turns - index) > 1e-6)
    throw Error(ErrorCode::non_integer_residual, "closed loop angle is not a multiple of 2pi");
  const int base = static_cast<int>(index);
  return {base + widen_lo, base + widen_hi};
}

IndexRange index_range(const DiscretePath& path, const ClosurePath& closure, const Vec3& pole) {
  return index_range(std::span<const Vec3>(path.nodes()), closure, pole);
}

int closed_index(std::span<const Vec3> polyline, const ClosurePath& closure, const Vec3& pole) {
  const IndexRange r = index_range(polyline, closure, pole);
  if (!r.exact()) throw Error(ErrorCode::segment_through_pole, "collision node leaves the index ambiguous");
  return r.lo;
}

int closed_index(const DiscretePath& path, const ClosurePath& closure, const Vec3& pole) {
  return closed_index(std::span<const Vec3>(path.nodes()), closure, pole);
}

std::vector<int> winding_vector(const DiscretePath& path, const ClosurePath& closure,
                                const PotentialSpec& spec) {
  std::vector<int> out;
  out.reserve(spec.size());
  for (const auto& c : spec.centres()) out.push_back(closed_index(path, closure, c.position));
  return out;
}

std::vector<int> parity_class(const DiscretePath& path, const ClosurePath& closure,
                              const PotentialSpec& spec) {
  auto w = winding_vector(path, closure, spec);
  for (auto& v : w) v = ((v % 2) + 2) % 2;
  return w;
}

// ---------------------------------------------------------------------------

bool WindingConstraint::accepts(int index) const {
  switch (kind) {
    case Kind::free: return true;
    case Kind::index: return index == value;
    case Kind::parity: return ((index % 2) + 2) % 2 == value;
  }
  return false;
}

HomotopyClass::HomotopyClass(std::vector<WindingConstraint> constraints, ClosurePath closure)
    : constraints_(std::move(constraints)), closure_(std::move(closure)) {
  bool any = false;
  for (const auto& c : constraints_) any |= c.kind != WindingConstraint::Kind::free;
  if (!any) throw Error(ErrorCode::invalid_argument, "a homotopy class needs at least one constraint");
}

HomotopyClass HomotopyClass::parities(std::span<const int> bits, ClosurePath closure) {
  std::vector<WindingConstraint> cs;
  for (int b : bits) cs.push_back(WindingConstraint::parity(b));
  return HomotopyClass(std::move(cs), std::move(closure));
}

HomotopyClass HomotopyClass::indices(std::span<const int> values, ClosurePath closure) {
  std::vector<WindingConstraint> cs;
  for (int v : values) cs.push_back(WindingConstraint::exact(v));
  return HomotopyClass(std::move(cs), std::move(closure));
}

bool HomotopyClass::contains(const DiscretePath& path, const PotentialSpec& spec) const {
  if (constraints_.size() != spec.size())
    throw Error(ErrorCode::invalid_argument, "class and potential disagree on the number of centres");
  for (std::size_t k = 0; k < constraints_.size(); ++k) {
    if (constraints_[k].kind == WindingConstraint::Kind::free) continue;
    IndexRange range;
    try {
      range = index_range(path, closure_, spec.centre(k).position);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::segment_through_pole || e.code() == ErrorCode::non_integer_residual)
        return false;
      throw;
    }
    bool any = false;
    for (int index = range.lo; index <= range.hi && !any; ++index) any = constraints_[k].accepts(index);
    if (!any) return false;
  }
  return true;
}

bool HomotopyClass::is_parity() const {
  for (const auto& c : constraints_)
    if (c.kind != WindingConstraint::Kind::parity) return false;
  return true;
}

std::vector<int> HomotopyClass::parity_bits() const {
  std::vector<int> bits;
  for (const auto& c : constraints_) bits.push_back(((c.value % 2) + 2) % 2);
  return bits;
}

// ---------------------------------------------------------------------------

namespace {

// Does the moving segment [a0 + s da, b0 + s db], s in [0, 1], ever contain c?
bool moving_segment_hits(const Eigen::Vector2d& a0, const Eigen::Vector2d& da, const Eigen::Vector2d& b0,
                         const Eigen::Vector2d& db, const Eigen::Vector2d& c) {
  const Eigen::Vector2d e0 = b0 - a0;
  const Eigen::Vector2d de = db - da;
  const Eigen::Vector2d f0 = c - a0;
  // cross(e(s), f(s)) with e = e0 + s de, f = f0 - s da.
  const double k0 = cross2(e0, f0);
  const double k1 = cross2(de, f0) - cross2(e0, da);
  const double k2 = -cross2(de, da);

  auto on_segment = [&](double s) {
    if (s < 0.0 || s > 1.0) return false;
    const Eigen::Vector2d e = e0 + s * de;
    const Eigen::Vector2d f = f0 - s * da;
    const double len2 = e.squaredNorm();
    const double scale = std::max({e.norm(), f.norm(), 1e-300});
    if (len2 <= 1e-300) return f.norm() <= 1e-12 * scale;
    const double lambda = f.dot(e) / len2;
    if (lambda < -1e-12 || lambda > 1.0 + 1e-12) return false;
    return std::abs(cross2(e, f)) <= 1e-9 * scale * scale;
  };

  double roots[2];
  int count = 0;
  const double scale = std::max({std::abs(k0), std::abs(k1), std::abs(k2)});
  if (scale == 0.0) {
    // Collinear throughout: c is hit iff it lies on the segment at either end
    // or anywhere in between; sample the projection parameter.
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
      if (on_segment(s)) return true;
    return false;
  }
  if (std::abs(k2) <= 1e-14 * scale) {
    if (std::abs(k1) > 1e-14 * scale) roots[count++] = -k0 / k1;
  } else {
    const double disc = k1 * k1 - 4.0 * k2 * k0;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (k1 + (k1 >= 0.0 ? sq : -sq));
      roots[count++] = q / k2;
      if (q != 0.0) roots[count++] = k0 / q;
    }
  }
  for (int i = 0; i < count; ++i)
    if (on_segment(roots[i])) return true;
  return on_segment(0.0) || on_segment(1.0);
}

}  // namespace

bool sweep_crosses_centre(std::span<const Vec3> old_nodes, std::span<const Vec3> new_nodes,
                          const PotentialSpec& spec) {
  if (old_nodes.size() != new_nodes.size()) throw Error(ErrorCode::invalid_argument, "paths differ in size");
  // A node sitting exactly on a centre in both paths is a collision node; its
  // two segments always touch that centre and are left to the class recheck.
  auto is_collision_node = [&](std::size_t i, const Vec3& c) {
    return on_pole(old_nodes[i], c) && on_pole(new_nodes[i], c);
  };

  for (std::size_t i = 0; i + 1 < old_nodes.size(); ++i) {
    const Eigen::Vector2d a0 = xy(old_nodes[i]);
    const Eigen::Vector2d b0 = xy(old_nodes[i + 1]);
    const Eigen::Vector2d da = xy(new_nodes[i]) - a0;
    const Eigen::Vector2d db = xy(new_nodes[i + 1]) - b0;
    if (da.squaredNorm() == 0.0 && db.squaredNorm() == 0.0) continue;
    for (const auto& c : spec.centres()) {
      if (is_collision_node(i, c.position) || is_collision_node(i + 1, c.position)) continue;
      const Eigen::Vector2d cc = xy(c.position);
      // Cheap rejection: the swept quad lies in the bounding box of its corners.
      const double minx = std::min({a0.x(), b0.x(), a0.x() + da.x(), b0.x() + db.x()});
      const double maxx = std::max({a0.x(), b0.x(), a0.x() + da.x(), b0.x() + db.x()});
      const double miny = std::min({a0.y(), b0.y(), a0.y() + da.y(), b0.y() + db.y()});
      const double maxy = std::max({a0.y(), b0.y(), a0.y() + da.y(), b0.y() + db.y()});
      if (cc.x() < minx || cc.x() > maxx || cc.y() < miny || cc.y() > maxy) continue;
      if (moving_segment_hits(a0, da, b0, db, cc)) return true;
    }
  }
  return false;
}

bool step_preserves_class(const DiscretePath& old_path, const DiscretePath& new_path,
                          const HomotopyClass& cls, const PotentialSpec& spec) {
  if (old_path.segments() != new_path.segments() || old_path.start() != new_path.start() ||
      old_path.end() != new_path.end())
    throw Error(ErrorCode::invalid_argument, "paths must share endpoints and grid");
  if (sweep_crosses_centre(old_path.nodes(), new_path.nodes(), spec)) return false;
  return cls.contains(new_path, spec);
}

nlohmann::json to_json(const ClosurePath& closure) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& w : closure.waypoints()) pts.push_back({w.x(), w.y(), w.z()});
  return pts;
}

nlohmann::json to_json(const HomotopyClass& cls) {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : cls.constraints()) {
    switch (c.kind) {
      case WindingConstraint::Kind::free: cs.push_back({{"kind", "free"}}); break;
      case WindingConstraint::Kind::index: cs.push_back({{"kind", "index"}, {"value", c.value}}); break;
      case WindingConstraint::Kind::parity: cs.push_back({{"kind", "parity"}, {"value", c.value}}); break;
    }
  }
  return {{"constraints", cs}, {"closure", to_json(cls.closure())}};
}

}  // namespace ncentre
