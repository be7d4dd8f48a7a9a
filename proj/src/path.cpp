#include "ncentre/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncentre/errors.hpp"
#include "ncentre/io.hpp"

namespace ncentre {

bool is_valid_segment_count(int n) { return n >= 8 && (n & (n - 1)) == 0; }

DiscretePath::DiscretePath(Mode mode, std::vector<Vec3> nodes) : mode_(mode), nodes_(std::move(nodes)) {
  const int n = static_cast<int>(nodes_.size()) - 1;
  if (!is_valid_segment_count(n))
    throw Error(ErrorCode::invalid_argument,
                "segment count must be a power of two >= 8, got " + std::to_string(n));
  for (auto& q : nodes_) {
    if (!q.allFinite()) throw Error(ErrorCode::invalid_argument, "path nodes must be finite");
    if (mode_ == Mode::planar && q.z() != 0.0)
      throw Error(ErrorCode::invalid_argument, "planar path nodes must have z = 0");
  }
}

DiscretePath DiscretePath::straight(const Vec3& p1, const Vec3& p2, int segments, Mode mode) {
  std::vector<Vec3> nodes(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double s = double(i) / segments;
    nodes[i] = (1.0 - s) * p1 + s * p2;
  }
  nodes.front() = p1;
  nodes.back() = p2;
  return DiscretePath(mode, std::move(nodes));
}

Vec3 DiscretePath::at(double t) const {
  const int n = segments();
  const double x = std::clamp(t, 0.0, 1.0) * n;
  const int i = std::min(static_cast<int>(std::floor(x)), n - 1);
  const double s = x - i;
  return (1.0 - s) * nodes_[i] + s * nodes_[i + 1];
}

void DiscretePath::set_interior(int i, const Vec3& value) {
  if (i <= 0 || i >= segments()) throw Error(ErrorCode::invalid_argument, "endpoints are immutable");
  if (!value.allFinite()) throw Error(ErrorCode::invalid_argument, "path nodes must be finite");
  Vec3 v = value;
  if (mode_ == Mode::planar) v.z() = 0.0;
  nodes_[i] = v;
}

double DiscretePath::arclength() const {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) len += (nodes_[i + 1] - nodes_[i]).norm();
  return len;
}

double DiscretePath::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (std::size_t j = i + 1; j < nodes_.size(); ++j) d = std::max(d, (nodes_[i] - nodes_[j]).norm());
  return d;
}

double kinetic_integral(const DiscretePath& path) {
  const auto& u = path.nodes();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) sum += (u[i + 1] - u[i]).squaredNorm();
  return 0.5 * sum * path.segments();
}

double potential_integral(const DiscretePath& path, const PotentialSpec& spec, double h, double delta) {
  if (delta < 0.0) throw Error(ErrorCode::invalid_argument, "delta must be non-negative");
  const auto& u = path.nodes();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    sum += evaluate_mollified(spec, 0.5 * (u[i] + u[i + 1]), delta) + h;
  return sum / path.segments();
}

double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p, double* param) {
  const Eigen::Vector2d ab(b.x() - a.x(), b.y() - a.y());
  const Eigen::Vector2d ap(p.x() - a.x(), p.y() - a.y());
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? std::clamp(ap.dot(ab) / len2, 0.0, 1.0) : 0.0;
  if (param) *param = s;
  return (ap - s * ab).norm();
}

DistanceHit min_distance_to(const DiscretePath& path, const PotentialSpec& spec, int centre) {
  const auto& u = path.nodes();
  const Vec3& c = spec.centre(static_cast<std::size_t>(centre)).position;
  DistanceHit best;
  best.distance = std::numeric_limits<double>::infinity();
  best.centre = centre;
  for (int i = 0; i < path.segments(); ++i) {
    double s = 0.0;
    const double d = segment_point_distance(u[i], u[i + 1], c, &s);
    if (d < best.distance) {
      best.distance = d;
      best.segment = i;
      best.time = (i + s) / path.segments();
    }
  }
  return best;
}

DistanceHit min_distance(const DiscretePath& path, const PotentialSpec& spec) {
  DistanceHit best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto hit = min_distance_to(path, spec, static_cast<int>(k));
    if (hit.distance < best.distance) best = hit;
  }
  return best;
}

DiscretePath refine(const DiscretePath& path) {
  const auto& u = path.nodes();
  std::vector<Vec3> out;
  out.reserve(2 * u.size() - 1);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    out.push_back(u[i]);
    out.push_back(0.5 * (u[i] + u[i + 1]));
  }
  out.push_back(u.back());
  return DiscretePath(path.mode(), std::move(out));
}

DiscretePath restrict(const DiscretePath& path, int i, int j) {
  if (i < 0 || j > path.segments() || j <= i)
    throw Error(ErrorCode::invalid_argument, "restrict needs 0 <= i < j <= N");
  const auto& u = path.nodes();
  return DiscretePath(path.mode(), std::vector<Vec3>(u.begin() + i, u.begin() + j + 1));
}

DiscretePath resample_polyline(std::span<const Vec3> polyline, int segments, Mode mode) {
  if (polyline.size() < 2) throw Error(ErrorCode::invalid_argument, "polyline needs two points");
  std::vector<double> cum(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i)
    cum[i] = cum[i - 1] + (polyline[i] - polyline[i - 1]).norm();
  const double total = cum.back();
  std::vector<Vec3> nodes(static_cast<std::size_t>(segments) + 1);
  std::size_t seg = 0;
  for (int k = 0; k <= segments; ++k) {
    if (total == 0.0) {
      nodes[k] = polyline.front();
      continue;
    }
    const double target = total * k / segments;
    while (seg + 2 < polyline.size() && cum[seg + 1] < target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double s = len > 0.0 ? std::clamp((target - cum[seg]) / len, 0.0, 1.0) : 0.0;
    nodes[k] = (1.0 - s) * polyline[seg] + s * polyline[seg + 1];
  }
  nodes.front() = polyline.front();
  nodes.back() = polyline.back();
  if (mode == Mode::planar)
    for (auto& q : nodes) q.z() = 0.0;
  return DiscretePath(mode, std::move(nodes));
}

std::string to_csv(std::span<const double> times, std::span<const Vec3> points, Mode mode) {
  CsvWriter csv;
  if (mode == Mode::planar) csv.header({"t", "x", "y"});
  else csv.header({"t", "x", "y", "z"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (mode == Mode::planar) csv.row({times[i], points[i].x(), points[i].y()});
    else csv.row({times[i], points[i].x(), points[i].y(), points[i].z()});
  }
  return csv.str();
}

std::string to_csv(const DiscretePath& path) {
  std::vector<double> t(path.nodes().size());
  for (int i = 0; i <= path.segments(); ++i) t[i] = path.time(i);
  return to_csv(t, path.nodes(), path.mode());
}

}  // namespace ncentre
