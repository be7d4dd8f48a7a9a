#include "descent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/LU>

#include "ncentre/errors.hpp"
#include "ncentre/functionals.hpp"

namespace ncentre::detail {

namespace {

using Field = std::vector<Vec3>;

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

void axpy(double a, const Field& x, Field& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double sup_norm(const Field& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

struct Evaluator {
  const DescentSetup& setup;
  Mode mode;

  DiscretePath make(const Field& nodes) const { return DiscretePath(mode, nodes); }

  double value(const DiscretePath& p) const {
    return kinetic_integral(p) * potential_integral(p, *setup.spec, setup.h, setup.delta);
  }

  // Full-length gradient (endpoints zero).
  Field gradient(const DiscretePath& p) const {
    auto g = grad_maupertuis(p, *setup.spec, setup.h, setup.delta);
    Field full(p.nodes().size(), Vec3::Zero());
    std::copy(g.begin(), g.end(), full.begin() + 1);
    return full;
  }
};

// Outward unit vector of a node lying on (or inside) the obstacle circle.
bool on_obstacle(const Vec3& q, const PotentialSpec& spec, const ObstacleProblem& ob, Vec3* outward) {
  const Vec3& c = spec.centre(static_cast<std::size_t>(ob.centre)).position;
  Vec3 r(q.x() - c.x(), q.y() - c.y(), 0.0);
  const double d = r.norm();
  if (d > ob.epsilon * (1.0 + 1e-9) + 1e-15) return false;
  if (outward) *outward = d > 0.0 ? Vec3(r / d) : Vec3::UnitX();
  return true;
}

// Zeroes endpoints and pinned nodes, and the radial component at nodes where
// the obstacle blocks descent (on the circle with -g pointing inward). Those
// binding nodes are flagged in the returned mask.
std::vector<char> reduce(Field& g, const Field& nodes, const DescentSetup& setup, const std::vector<char>& pinned) {
  std::vector<char> binding(g.size(), 0);
  g.front().setZero();
  g.back().setZero();
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    if (pinned[i]) {
      g[i].setZero();
      continue;
    }
    Vec3 out;
    if (setup.obstacle && on_obstacle(nodes[i], *setup.spec, *setup.obstacle, &out)) {
      const double radial = g[i].dot(out);
      if (radial >= 0.0) {
        g[i] -= radial * out;
        binding[i] = 1;
      }
    }
  }
  return binding;
}

using Mat3 = Eigen::Matrix3d;

// Local frame per interior node: identity, or (radial, tangential, z) for a
// binding obstacle node whose radial coordinate is then held fixed.
struct Frames {
  std::vector<Mat3> basis;
  std::vector<std::array<bool, 3>> fixed;
};

Frames make_frames(const Field& nodes, const DescentSetup& setup, const std::vector<char>& pinned,
                   const std::vector<char>& binding) {
  Frames fr;
  fr.basis.assign(nodes.size(), Mat3::Identity());
  fr.fixed.assign(nodes.size(), {false, false, false});
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    if (pinned[i]) {
      fr.fixed[i] = {true, true, true};
    } else if (binding[i]) {
      Vec3 out;
      on_obstacle(nodes[i], *setup.spec, *setup.obstacle, &out);
      fr.basis[i].col(0) = out;
      fr.basis[i].col(1) = Vec3(-out.y(), out.x(), 0.0);
      fr.basis[i].col(2) = Vec3::UnitZ();
      fr.fixed[i] = {true, false, false};
    }
  }
  return fr;
}

// Solves (scale * tridiag(-1, 2, -1) (x) I) x = v over interior nodes with the
// fixed local coordinates of `fr` removed (block Thomas algorithm).
Field precondition(const Field& v, double scale, const Frames& fr) {
  const std::size_t n = v.size();
  Field x(n, Vec3::Zero());
  if (n < 3) return x;
  auto mask_rows = [&](Mat3 m, std::size_t i) {
    for (int c = 0; c < 3; ++c)
      if (fr.fixed[i][c]) m.row(c).setZero();
    return m;
  };
  auto mask_cols = [&](Mat3 m, std::size_t j) {
    for (int c = 0; c < 3; ++c)
      if (fr.fixed[j][c]) m.col(c).setZero();
    return m;
  };
  auto diag = [&](std::size_t i) {
    Mat3 d = 2.0 * scale * Mat3::Identity();
    for (int c = 0; c < 3; ++c)
      if (fr.fixed[i][c]) d(c, c) = 1.0;
    return d;
  };
  auto coupling = [&](std::size_t i, std::size_t j) {  // block (i, j), |i - j| = 1
    return mask_cols(mask_rows(Mat3(-scale * fr.basis[i].transpose() * fr.basis[j]), i), j);
  };
  auto rhs = [&](std::size_t i) {
    Vec3 b = fr.basis[i].transpose() * v[i];
    for (int c = 0; c < 3; ++c)
      if (fr.fixed[i][c]) b[c] = 0.0;
    return b;
  };

  std::vector<Mat3> cp(n);
  std::vector<Vec3> dp(n);
  const std::size_t first = 1, last = n - 2;
  for (std::size_t i = first; i <= last; ++i) {
    Mat3 m = diag(i);
    Vec3 b = rhs(i);
    if (i > first) {
      const Mat3 a = coupling(i, i - 1);
      m -= a * cp[i - 1];
      b -= a * dp[i - 1];
    }
    const Mat3 minv = m.inverse();
    if (i < last) cp[i] = minv * coupling(i, i + 1);
    dp[i] = minv * b;
  }
  Field y(n, Vec3::Zero());
  y[last] = dp[last];
  for (std::size_t i = last; i-- > first;) y[i] = dp[i] - cp[i] * y[i + 1];
  for (std::size_t i = first; i <= last; ++i) x[i] = fr.basis[i] * y[i];
  return x;
}

// Binding nodes are put back on the obstacle circle; any other node that
// ended up inside is pushed radially out.
void retract(Field& nodes, const DescentSetup& setup, const std::vector<char>& binding) {
  if (!setup.obstacle) return;
  const auto& ob = *setup.obstacle;
  const Vec3& c = setup.spec->centre(static_cast<std::size_t>(ob.centre)).position;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    Vec3& q = nodes[i];
    const double dx = q.x() - c.x(), dy = q.y() - c.y();
    const double d = std::hypot(dx, dy);
    if (!binding[i] && d >= ob.epsilon) continue;
    if (d == 0.0) {
      q.x() = c.x() + ob.epsilon;
      continue;
    }
    q.x() = c.x() + dx * (ob.epsilon / d);
    q.y() = c.y() + dy * (ob.epsilon / d);
  }
}

// Node projection alone lets a chord cut through the obstacle disc; such a
// chord can drift onto the centre and lock the class check. Segments must
// keep at least half the obstacle radius.
bool chords_clear(const Field& nodes, const DescentSetup& setup) {
  if (!setup.obstacle) return true;
  const Vec3& c = setup.spec->centre(static_cast<std::size_t>(setup.obstacle->centre)).position;
  const double floor = 0.5 * setup.obstacle->epsilon;
  const Eigen::Vector2d cc(c.x(), c.y());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const Eigen::Vector2d a(nodes[i].x(), nodes[i].y()), b(nodes[i + 1].x(), nodes[i + 1].y());
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((cc - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    if ((a + t * ab - cc).norm() < floor) return false;
  }
  return true;
}

// A node that has crept within the pin radius of a centre, or the nearer end
// of a segment that has, is snapped onto the centre and frozen, provided
// the snapped path still lies in the class.
bool pin_nodes(Field& nodes, const DescentSetup& setup, Mode mode, std::vector<char>& pinned) {
  if (setup.pin_radius <= 0.0) return false;
  auto try_snap = [&](std::size_t i, const Centre& c) {
    if (i == 0 || i + 1 >= nodes.size() || pinned[i]) return false;
    Field snapped = nodes;
    snapped[i].x() = c.position.x();
    snapped[i].y() = c.position.y();
    bool ok = false;
    try {
      ok = setup.cls->contains(DiscretePath(mode, snapped), *setup.spec);
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) return false;
    nodes = std::move(snapped);
    pinned[i] = 1;
    return true;
  };
  bool changed = false;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    for (const auto& c : setup.spec->centres()) {
      if (segment_point_distance(nodes[i], nodes[i + 1], c.position) >= setup.pin_radius) continue;
      if ((pinned[i] && centre_distance(c, nodes[i]) == 0.0) || (pinned[i + 1] && centre_distance(c, nodes[i + 1]) == 0.0))
        continue;
      const bool a_first = centre_distance(c, nodes[i]) <= centre_distance(c, nodes[i + 1]);
      const std::size_t first = a_first ? i : i + 1, second = a_first ? i + 1 : i;
      changed |= try_snap(first, c) || try_snap(second, c);
    }
  }
  return changed;
}

}  // namespace

bool project_obstacle(std::vector<Vec3>& nodes, const PotentialSpec& spec, const ObstacleProblem& obstacle) {
  const Vec3& c = spec.centre(static_cast<std::size_t>(obstacle.centre)).position;
  bool moved = false;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    Vec3& q = nodes[i];
    const double dx = q.x() - c.x(), dy = q.y() - c.y();
    const double d = std::hypot(dx, dy);
    if (d >= obstacle.epsilon) continue;
    if (d == 0.0) {
      q.x() = c.x() + obstacle.epsilon;
    } else {
      q.x() = c.x() + dx * (obstacle.epsilon / d);
      q.y() = c.y() + dy * (obstacle.epsilon / d);
    }
    moved = true;
  }
  return moved;
}

double reduced_gradient_norm(const DiscretePath& path, const DescentSetup& setup, const std::vector<char>& pinned) {
  Evaluator ev{setup, path.mode()};
  Field g = ev.gradient(path);
  reduce(g, path.nodes(), setup, pinned);
  return sup_norm(g);
}

DescentOutcome descend(const DiscretePath& start, const DescentSetup& setup, const MinimizeOptions& opts,
                       std::vector<char> pinned) {
  Evaluator ev{setup, start.mode()};
  const int n = start.segments();
  pinned.resize(start.nodes().size(), 0);

  Field x = start.nodes();
  if (setup.obstacle) project_obstacle(x, *setup.spec, *setup.obstacle);
  pin_nodes(x, setup, start.mode(), pinned);
  DiscretePath cur = ev.make(x);

  double f = ev.value(cur);
  Field g = ev.gradient(cur);
  std::vector<char> binding = reduce(g, x, setup, pinned);

  std::deque<Field> mem_s, mem_y;
  std::deque<double> mem_rho;
  auto reset_memory = [&] {
    mem_s.clear();
    mem_y.clear();
    mem_rho.clear();
  };

  // Node displacement cap per trial step, relative to the path extent.
  const double cap = 0.25 * std::max(start.diameter(), scene_diameter(*setup.spec));

  DescentOutcome out;
  for (int it = 0;; ++it) {
    out.gradient_norm = sup_norm(g);
    out.iterations = it;
    if (out.gradient_norm <= setup.tolerance) {
      out.converged = true;
      break;
    }
    if (it >= setup.max_iterations) break;

    const double pscale = std::max(potential_integral(cur, *setup.spec, setup.h, setup.delta), 1e-12) * n;
    const Frames frames = make_frames(x, setup, pinned, binding);
    auto direction = [&](bool use_memory) {
      Field q = g;
      std::vector<double> alpha(mem_s.size());
      if (use_memory) {
        for (std::size_t k = mem_s.size(); k-- > 0;) {
          alpha[k] = mem_rho[k] * dot(mem_s[k], q);
          axpy(-alpha[k], mem_y[k], q);
        }
      }
      Field r = precondition(q, pscale, frames);
      if (use_memory) {
        for (std::size_t k = 0; k < mem_s.size(); ++k) {
          const double beta = mem_rho[k] * dot(mem_y[k], r);
          axpy(alpha[k] - beta, mem_s[k], r);
        }
      }
      r.front().setZero();
      r.back().setZero();
      for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (pinned[i]) r[i].setZero();
        else if (binding[i]) r[i] -= r[i].dot(frames.basis[i].col(0)) * frames.basis[i].col(0);
      }
      for (auto& v : r) v = -v;
      return r;
    };

    bool accepted = false;
    Field x_new, g_new;
    double f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const bool use_memory = attempt == 0 && !mem_s.empty();
      Field d = direction(use_memory);
      if (!(dot(g, d) < 0.0)) {
        reset_memory();
        if (use_memory) continue;
        break;
      }
      double step = 1.0;
      const double dmax = sup_norm(d);
      if (dmax * step > cap) step = cap / dmax;
      for (int tries = 0; tries < 80 && step * dmax > 1e-15 * cap; ++tries, step *= opts.backtracking) {
        Field trial = x;
        axpy(step, d, trial);
        retract(trial, setup, binding);
        DiscretePath tp = ev.make(trial);
        if (!chords_clear(trial, setup) || !step_preserves_class(cur, tp, *setup.cls, *setup.spec)) continue;
        double ft;
        try {
          ft = ev.value(tp);
        } catch (const Error&) {
          continue;
        }
        if (!std::isfinite(ft)) continue;
        Field dx = trial;
        axpy(-1.0, x, dx);
        const double pred = dot(g, dx);
        bool ok = ft < f && ft <= f + opts.sufficient_decrease * pred;
        Field gt;
        if (!ok && std::abs(ft - f) <= 1e-12 * std::abs(f) && pred < 0.0) {
          // Value differences are lost in rounding here; fall back on the
          // trapezoidal estimate of the change built from gradients.
          gt = ev.gradient(tp);
          Field gr = gt;
          reduce(gr, trial, setup, pinned);
          const double est = 0.5 * (pred + dot(gr, dx));
          ok = est <= opts.sufficient_decrease * pred && ft <= f + 1e-14 * std::abs(f);
        }
        if (ok) {
          accepted = true;
          x_new = std::move(trial);
          f_new = ft;
          g_new = gt.empty() ? ev.gradient(tp) : std::move(gt);
          cur = std::move(tp);
          break;
        }
      }
      if (!accepted && !use_memory) break;
      if (!accepted) reset_memory();
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }

    bool structure_changed = pin_nodes(x_new, setup, start.mode(), pinned);
    if (structure_changed) {
      cur = ev.make(x_new);
      f_new = ev.value(cur);
      g_new = ev.gradient(cur);
    }
    std::vector<char> new_binding = reduce(g_new, x_new, setup, pinned);
    structure_changed |= new_binding != binding;
    binding = std::move(new_binding);

    if (structure_changed) {
      reset_memory();
    } else {
      Field s = x_new;
      axpy(-1.0, x, s);
      Field y = g_new;
      axpy(-1.0, g, y);
      const double sy = dot(s, y);
      if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)) && sy > 0.0) {
        mem_s.push_back(std::move(s));
        mem_y.push_back(std::move(y));
        mem_rho.push_back(1.0 / sy);
        if (static_cast<int>(mem_s.size()) > opts.lbfgs_memory) {
          mem_s.pop_front();
          mem_y.pop_front();
          mem_rho.pop_front();
        }
      }
    }
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
  }
  out.nodes = std::move(x);
  out.pinned = std::move(pinned);
  return out;
}

}  // namespace ncentre::detail
