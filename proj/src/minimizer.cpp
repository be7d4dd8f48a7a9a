#include "ncentre/minimizer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "descent.hpp"
#include "json_fields.hpp"
#include "ncentre/errors.hpp"

namespace ncentre {

void MinimizeOptions::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::invalid_argument, std::string(name) + " must be positive");
  };
  if (max_iterations <= 0) throw Error(ErrorCode::invalid_argument, "max_iterations must be positive");
  if (lbfgs_memory <= 0) throw Error(ErrorCode::invalid_argument, "lbfgs_memory must be positive");
  positive(gradient_tolerance, "gradient_tolerance");
  positive(initial_delta, "initial_delta");
  positive(final_delta, "final_delta");
  positive(collision_threshold, "collision_threshold");
  positive(symmetry_tolerance, "symmetry_tolerance");
  positive(pin_radius, "pin_radius");
  positive(sufficient_decrease, "sufficient_decrease");
  if (!(annealing_factor > 0.0 && annealing_factor < 1.0))
    throw Error(ErrorCode::invalid_argument, "annealing_factor must lie in (0, 1)");
  if (!(backtracking > 0.0 && backtracking < 1.0))
    throw Error(ErrorCode::invalid_argument, "backtracking must lie in (0, 1)");
  if (!(sufficient_decrease < 1.0)) throw Error(ErrorCode::invalid_argument, "sufficient_decrease must be < 1");
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::collision_free: return "collision-free";
    case Classification::collision_ejection: return "collision-ejection";
    case Classification::obstacle_bound: return "obstacle-bound";
    case Classification::unclassified: return "unclassified";
  }
  return "unclassified";
}

namespace {

double path_scene_diameter(const PotentialSpec& spec, const DiscretePath& path) {
  const std::array<Vec3, 2> ends{path.start(), path.end()};
  return scene_diameter(spec, ends);
}

// Moves the collision node at index `at` to `to`, resampling the arcs on
// either side (piecewise linearly in the old index) onto their new node
// counts. Nodes pinned elsewhere must stay out of the resampled range.
std::vector<Vec3> shift_collision(const std::vector<Vec3>& nodes, int at, int to, int lo, int hi) {
  std::vector<Vec3> out = nodes;
  auto resample = [&](int a0, int a1, int b0, int b1) {  // old [a0, a1] onto new [b0, b1]
    for (int j = b0 + 1; j < b1; ++j) {
      const double s = a0 + double(j - b0) * (a1 - a0) / double(b1 - b0);
      const int k = std::min(static_cast<int>(std::floor(s)), a1 - 1);
      const double f = s - k;
      out[j] = (1.0 - f) * nodes[k] + f * nodes[k + 1];
    }
  };
  resample(lo, at, lo, to);
  resample(at, hi, to, hi);
  out[to] = nodes[at];
  return out;
}

MinimizationResult run(const DiscretePath& path0, const HomotopyClass& cls, const PotentialSpec& spec, double h,
                       const MinimizeOptions& opts, std::optional<ObstacleProblem> obstacle) {
  opts.validate();
  if (path0.mode() != spec.mode()) throw Error(ErrorCode::invalid_argument, "path and potential modes differ");
  if (!cls.contains(path0, spec))
    throw Error(ErrorCode::class_violation_at_start, "initial path is not in the requested class");

  const double diameter = path_scene_diameter(spec, path0);
  detail::DescentSetup setup;
  setup.spec = &spec;
  setup.cls = &cls;
  setup.h = h;
  setup.obstacle = obstacle;
  setup.pin_radius = obstacle ? 0.0 : opts.pin_radius * diameter;

  DiscretePath current = path0;
  if (obstacle) {
    auto nodes = path0.nodes();
    if (detail::project_obstacle(nodes, spec, *obstacle)) {
      DiscretePath projected(path0.mode(), std::move(nodes));
      if (!step_preserves_class(path0, projected, cls, spec))
        throw Error(ErrorCode::class_violation_at_start, "obstacle projection changes the class of the start path");
      current = std::move(projected);
    }
  }
  std::vector<char> pinned(current.nodes().size(), 0);

  setup.delta = 0.0;
  setup.tolerance = opts.gradient_tolerance;
  const double g0 = detail::reduced_gradient_norm(current, setup, pinned);

  int iterations = 0;
  bool converged = g0 <= opts.gradient_tolerance;
  bool stalled = false;
  double gnorm = g0;
  if (!converged) {
    // Annealed stages on the mollified functional; skipped once delta is
    // negligible next to the distance from the path to every centre.
    const double stage_tol = std::max(opts.gradient_tolerance, 1e-3 * g0);
    const int stage_iterations = std::max(100, opts.max_iterations / 10);
    for (double delta = opts.initial_delta * diameter; delta >= opts.final_delta * diameter;
         delta *= opts.annealing_factor) {
      if (iterations >= opts.max_iterations) break;
      if (delta <= 1e-3 * min_distance(current, spec).distance) break;
      // A mollifier wider than the obstacle pulls chords across the disc.
      if (obstacle && delta > 0.1 * obstacle->epsilon) continue;
      setup.delta = delta;
      setup.tolerance = stage_tol;
      setup.max_iterations = std::min(stage_iterations, opts.max_iterations - iterations);
      auto out = detail::descend(current, setup, opts, pinned);
      iterations += out.iterations;
      current = DiscretePath(current.mode(), std::move(out.nodes));
      pinned = std::move(out.pinned);
    }
    setup.delta = 0.0;
    setup.tolerance = opts.gradient_tolerance;
    setup.max_iterations = std::max(0, opts.max_iterations - iterations);
    auto out = detail::descend(current, setup, opts, pinned);
    iterations += out.iterations;
    current = DiscretePath(current.mode(), std::move(out.nodes));
    pinned = std::move(out.pinned);
    converged = out.converged;
    stalled = out.stalled;
    gnorm = out.gradient_norm;
  }

  // A pinned collision node fixes the collision time to a grid index chosen
  // by where the path first touched. Slide it along the grid while that
  // lowers the value.
  if (converged && !obstacle) {
    const int n = current.segments();
    for (int at = 1; at < n; ++at) {
      if (!pinned[at]) continue;
      int lo = at - 1, hi = at + 1;
      while (lo > 0 && !pinned[lo]) --lo;
      while (hi < n && !pinned[hi]) ++hi;
      double best = maupertuis(current, spec, h, 0.0).value;
      for (int dir : {-1, 1}) {
        bool moved = false;
        while (true) {
          const int to = at + dir;
          if (to <= lo || to >= hi || iterations >= opts.max_iterations) break;
          DiscretePath trial(current.mode(), shift_collision(current.nodes(), at, to, lo, hi));
          if (!cls.contains(trial, spec)) break;
          std::vector<char> trial_pins = pinned;
          trial_pins[at] = 0;
          trial_pins[to] = 1;
          setup.max_iterations = std::max(0, opts.max_iterations - iterations);
          auto out = detail::descend(trial, setup, opts, trial_pins);
          iterations += out.iterations;
          if (!out.converged) break;
          DiscretePath candidate(current.mode(), std::move(out.nodes));
          const double value = maupertuis(candidate, spec, h, 0.0).value;
          if (!(value < best)) break;
          best = value;
          current = std::move(candidate);
          pinned = std::move(out.pinned);
          gnorm = out.gradient_norm;
          at = to;
          moved = true;
        }
        if (moved) break;
      }
    }
  }

  MinimizationResult r{current, {}, 0.0, converged, iterations, gnorm, {}, false, {}, {}, {}};
  r.value = maupertuis(r.path, spec, h, 0.0);
  r.omega_sq = r.value.omega_sq;
  for (std::size_t i = 0; i < pinned.size(); ++i)
    if (pinned[i]) r.pinned_nodes.push_back(static_cast<int>(i));
  if (obstacle) {
    const Vec3& c = spec.centre(static_cast<std::size_t>(obstacle->centre)).position;
    for (int i = 1; i < r.path.segments(); ++i) {
      const Vec3& q = r.path.node(i);
      if (std::abs(std::hypot(q.x() - c.x(), q.y() - c.y()) - obstacle->epsilon) <= 1e-9) {
        r.constraint_active = true;
        break;
      }
    }
  }
  r.collisions = detect_collisions(r.path, spec, opts.collision_threshold * diameter);
  r.classification = classify(r, cls, spec, opts);
  if (converged) r.message = "converged";
  else if (stalled) r.message = "no descent direction";
  else r.message = "iteration limit reached";
  return r;
}

}  // namespace

MinimizationResult minimize_in_class(const DiscretePath& path0, const HomotopyClass& cls, const PotentialSpec& spec,
                                     double h, const MinimizeOptions& opts) {
  return run(path0, cls, spec, h, opts, std::nullopt);
}

MinimizationResult obstacle_minimize(const DiscretePath& path0, const HomotopyClass& cls,
                                     const ObstacleProblem& obstacle, const PotentialSpec& spec, double h,
                                     const MinimizeOptions& opts) {
  if (obstacle.centre < 0 || static_cast<std::size_t>(obstacle.centre) >= spec.size())
    throw Error(ErrorCode::invalid_argument, "obstacle centre index out of range");
  const auto& c = spec.centre(static_cast<std::size_t>(obstacle.centre));
  if (!(obstacle.epsilon > 0.0) || !(obstacle.epsilon < c.radius))
    throw Error(ErrorCode::invalid_argument, "obstacle epsilon must lie in (0, neighbourhood radius)");
  return run(path0, cls, spec, h, opts, obstacle);
}

std::vector<SweepRow> sweep_d_of_eps(const DiscretePath& path0, const HomotopyClass& cls, int centre,
                                     std::vector<double> eps, const PotentialSpec& spec, double h,
                                     const MinimizeOptions& opts, int jobs) {
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<SweepRow> rows(eps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < eps.size(); i = next++) {
      SweepRow& row = rows[i];
      row.epsilon = eps[i];
      try {
        auto r = obstacle_minimize(path0, cls, {centre, eps[i]}, spec, h, opts);
        row.value = r.value.value;
        row.constraint_active = r.constraint_active;
        row.converged = r.converged;
        row.omega_sq = r.omega_sq;
        row.result = std::move(r);
      } catch (const Error& e) {
        row.error = std::string(to_string(e.code())) + ": " + e.what();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(eps.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

CollisionReport detect_collisions(const DiscretePath& path, const PotentialSpec& spec, double threshold) {
  CollisionReport rep;
  rep.threshold = threshold;
  const auto& u = path.nodes();
  const int n = path.segments();
  std::vector<double> d(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const Vec3& c = spec.centre(k).position;
    for (int i = 0; i < n; ++i) d[i] = segment_point_distance(u[i], u[i + 1], c, &s[i]);
    const auto best = std::min_element(d.begin(), d.end()) - d.begin();
    CentreApproach ap;
    ap.centre = static_cast<int>(k);
    ap.min_distance = d[best];
    ap.time = (best + s[best]) / n;
    ap.below_threshold = d[best] < threshold;
    rep.per_centre.push_back(ap);

    std::vector<CollisionCandidate> found;
    for (int i = 0; i < n; ++i) {
      const double left = i > 0 ? d[i - 1] : std::numeric_limits<double>::infinity();
      const double right = i + 1 < n ? d[i + 1] : std::numeric_limits<double>::infinity();
      if (!(d[i] < threshold) || d[i] > left || d[i] > right) continue;
      CollisionCandidate cand{static_cast<int>(k), (i + s[i]) / n, d[i], i};
      if (!found.empty() && i - found.back().segment <= 4) {
        if (cand.distance < found.back().distance) found.back() = cand;
        continue;
      }
      found.push_back(cand);
    }
    rep.candidates.insert(rep.candidates.end(), found.begin(), found.end());
  }
  std::sort(rep.candidates.begin(), rep.candidates.end(),
            [](const auto& a, const auto& b) { return a.time < b.time; });
  return rep;
}

bool check_reflection_symmetry(const DiscretePath& path, double t1, double tol) {
  const int n = path.segments();
  const double scale = tol * path.diameter();
  for (int k = 1; k <= n; ++k) {
    const double s = double(k) / n;
    if (t1 - s < 0.0 || t1 + s > 1.0) break;
    if ((path.at(t1 + s) - path.at(t1 - s)).norm() > scale) return false;
  }
  return true;
}

Classification classify(const MinimizationResult& result, const HomotopyClass& cls, const PotentialSpec& spec,
                        const MinimizeOptions& opts) {
  if (result.constraint_active) return Classification::obstacle_bound;
  const auto& cands = result.collisions.candidates;
  if (cands.empty()) return Classification::collision_free;
  for (const auto& c : cands)
    if (!check_reflection_symmetry(result.path, c.time, opts.symmetry_tolerance)) return Classification::unclassified;

  std::vector<int> hits(spec.size(), 0);
  for (const auto& c : cands) ++hits[static_cast<std::size_t>(c.centre)];
  std::vector<int> hit_centres;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (hits[k] > 1) return Classification::unclassified;
    if (hits[k] == 1) hit_centres.push_back(static_cast<int>(k));
  }
  auto alpha_one = [&](int k) { return spec.centre(static_cast<std::size_t>(k)).exponent == 1.0; };
  for (int k : hit_centres)
    if (!alpha_one(k)) return Classification::unclassified;

  if (!cls.is_parity()) {
    // Exact-index classes: a single collision-ejection at an alpha = 1 centre.
    return hit_centres.size() == 1 ? Classification::collision_ejection : Classification::unclassified;
  }
  const auto bits = cls.parity_bits();
  auto differs_from_rest = [&](std::initializer_list<int> group) {
    const int b = bits[static_cast<std::size_t>(*group.begin())];
    for (std::size_t m = 0; m < bits.size(); ++m) {
      const bool in_group = std::find(group.begin(), group.end(), static_cast<int>(m)) != group.end();
      if (in_group ? bits[m] != b : bits[m] == b) return false;
    }
    return true;
  };
  if (hit_centres.size() == 1 && differs_from_rest({hit_centres[0]})) return Classification::collision_ejection;
  if (hit_centres.size() == 2 && differs_from_rest({hit_centres[0], hit_centres[1]}))
    return Classification::collision_ejection;
  return Classification::unclassified;
}

// ---------------------------------------------------------------------------

DiscretePath spiral_path(const Vec3& p1, const Vec3& p2, const Vec3& centre, double angle, int segments, Mode mode) {
  const Eigen::Vector2d a(p1.x() - centre.x(), p1.y() - centre.y());
  const Eigen::Vector2d b(p2.x() - centre.x(), p2.y() - centre.y());
  if (a.norm() == 0.0 || b.norm() == 0.0) throw Error(ErrorCode::pole_coincidence, "endpoint at the centre");
  const double th1 = std::atan2(a.y(), a.x());
  const double th2 = std::atan2(b.y(), b.x());
  const double mismatch = std::remainder(th1 + angle - th2, 2.0 * std::numbers::pi);
  if (std::abs(mismatch) > 1e-9)
    throw Error(ErrorCode::invalid_argument, "requested angle is inconsistent with the endpoints");
  const double l1 = std::log(a.norm()), l2 = std::log(b.norm());
  std::vector<Vec3> nodes(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double s = double(i) / segments;
    const double r = std::exp((1.0 - s) * l1 + s * l2);
    const double th = th1 + angle * s;
    nodes[i] = Vec3(centre.x() + r * std::cos(th), centre.y() + r * std::sin(th),
                    mode == Mode::planar ? 0.0 : (1.0 - s) * p1.z() + s * p2.z());
  }
  nodes.front() = p1;
  nodes.back() = p2;
  return DiscretePath(mode, std::move(nodes));
}

DiscretePath lasso_path(const PotentialSpec& spec, const Vec3& p1, const Vec3& p2, const ClosurePath& closure,
                        const std::vector<int>& indices, int segments) {
  if (indices.size() != spec.size()) throw Error(ErrorCode::invalid_argument, "one index per centre required");
  const std::array<Vec3, 2> base{p1, p2};
  std::vector<Vec3> poly{p1};
  constexpr int kPerTurn = 64;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const int current = closed_index(base, closure, spec.centre(k).position);
    const int turns = indices[k] - current;
    if (turns == 0) continue;
    const Vec3& c = spec.centre(k).position;
    const Vec3 off(p1.x() - c.x(), p1.y() - c.y(), 0.0);
    const double dist = off.norm();
    if (dist == 0.0) throw Error(ErrorCode::pole_coincidence, "endpoint at a centre");
    const double rho = std::min(0.5 * spec.centre(k).radius, 0.5 * dist);
    const double phi0 = std::atan2(off.y(), off.x());
    const double sign = turns > 0 ? 1.0 : -1.0;
    for (int j = 0; j <= std::abs(turns) * kPerTurn; ++j) {
      const double phi = phi0 + sign * 2.0 * std::numbers::pi * j / kPerTurn;
      poly.push_back(Vec3(c.x() + rho * std::cos(phi), c.y() + rho * std::sin(phi), p1.z()));
    }
    poly.push_back(p1);
  }
  poly.push_back(p2);
  DiscretePath path = resample_polyline(poly, segments, spec.mode());
  if (winding_vector(path, closure, spec) != indices)
    throw Error(ErrorCode::invalid_argument, "could not build an initial path with the requested winding");
  return path;
}

DiscretePath perturb_in_class(const DiscretePath& path, const HomotopyClass& cls, const PotentialSpec& spec,
                              std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  constexpr int kModes = 4;
  std::array<Vec3, kModes> coeff;
  for (int m = 0; m < kModes; ++m)
    coeff[m] = Vec3(unif(rng), unif(rng), path.mode() == Mode::planar ? 0.0 : unif(rng)) / (m + 1);
  const double scale = amplitude * std::max(path.diameter(), path_scene_diameter(spec, path));
  const int n = path.segments();
  for (double a = scale; a > 1e-12 * scale; a *= 0.5) {
    std::vector<Vec3> nodes = path.nodes();
    for (int i = 1; i < n; ++i) {
      const double t = path.time(i);
      for (int m = 0; m < kModes; ++m) nodes[i] += a * std::sin((m + 1) * std::numbers::pi * t) * coeff[m];
    }
    DiscretePath trial(path.mode(), std::move(nodes));
    if (step_preserves_class(path, trial, cls, spec)) return trial;
  }
  return path;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const CollisionReport& report) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& a : report.per_centre)
    per.push_back({{"centre", a.centre},
                   {"min_distance", a.min_distance},
                   {"time", a.time},
                   {"below_threshold", a.below_threshold}});
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : report.candidates)
    cands.push_back({{"centre", c.centre}, {"time", c.time}, {"distance", c.distance}});
  return {{"threshold", report.threshold}, {"per_centre", per}, {"candidates", cands}, {"count", cands.size()}};
}

nlohmann::json to_json(const MinimizationResult& r) {
  return {{"functional", to_json(r.value)},
          {"omega_sq", r.omega_sq},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"gradient_norm", r.gradient_norm},
          {"pinned_nodes", r.pinned_nodes},
          {"constraint_active", r.constraint_active},
          {"collisions", to_json(r.collisions)},
          {"classification", to_string(r.classification)},
          {"message", r.message}};
}

nlohmann::json to_json(const MinimizeOptions& o) {
  return {{"max_iterations", o.max_iterations},
          {"gradient_tolerance", o.gradient_tolerance},
          {"initial_delta", o.initial_delta},
          {"annealing_factor", o.annealing_factor},
          {"final_delta", o.final_delta},
          {"backtracking", o.backtracking},
          {"sufficient_decrease", o.sufficient_decrease},
          {"lbfgs_memory", o.lbfgs_memory},
          {"collision_threshold", o.collision_threshold},
          {"symmetry_tolerance", o.symmetry_tolerance},
          {"pin_radius", o.pin_radius}};
}

MinimizeOptions minimize_options_from_json(const nlohmann::json& j, const std::string& at) {
  MinimizeOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) detail::fail(at, "expected an object");
  auto integer = [&](const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) detail::fail(at + "." + key, "expected an integer");
    return v.get<int>();
  };
  o.max_iterations = integer("max_iterations", o.max_iterations);
  o.lbfgs_memory = integer("lbfgs_memory", o.lbfgs_memory);
  o.gradient_tolerance = detail::field_number_or(j, "gradient_tolerance", at, o.gradient_tolerance);
  o.initial_delta = detail::field_number_or(j, "initial_delta", at, o.initial_delta);
  o.annealing_factor = detail::field_number_or(j, "annealing_factor", at, o.annealing_factor);
  o.final_delta = detail::field_number_or(j, "final_delta", at, o.final_delta);
  o.backtracking = detail::field_number_or(j, "backtracking", at, o.backtracking);
  o.sufficient_decrease = detail::field_number_or(j, "sufficient_decrease", at, o.sufficient_decrease);
  o.collision_threshold = detail::field_number_or(j, "collision_threshold", at, o.collision_threshold);
  o.symmetry_tolerance = detail::field_number_or(j, "symmetry_tolerance", at, o.symmetry_tolerance);
  o.pin_radius = detail::field_number_or(j, "pin_radius", at, o.pin_radius);
  try {
    o.validate();
  } catch (const Error& e) {
    detail::fail(at, e.what());
  }
  return o;
}

}  // namespace ncentre
