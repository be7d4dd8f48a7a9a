#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace ncentre::testing {

inline constexpr double pi = std::numbers::pi;

inline PotentialSpec unit_centre(double alpha = 1.0, double radius = 1.0) {
  return PotentialSpec({Centre{Vec3::Zero(), 1.0, alpha, radius}});
}

inline DiscretePath from_function(int n, auto&& f) {
  std::vector<Vec3> nodes(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) nodes[static_cast<std::size_t>(i)] = f(double(i) / n);
  return DiscretePath(Mode::planar, std::move(nodes));
}

/// Endpoint coordinates within 1e-14 of an integer are snapped to it, so
/// arcs ending at multiples of pi/2 meet closures built from exact points.
inline DiscretePath circle_arc(int n, double radius, double a0, double a1, const Vec3& c = Vec3::Zero()) {
  auto snap = [](Vec3 p) {
    for (int d = 0; d < 3; ++d)
      if (std::abs(p[d] - std::round(p[d])) < 1e-14) p[d] = std::round(p[d]);
    return p;
  };
  return from_function(n, [&](double t) {
    const double a = a0 + (a1 - a0) * t;
    const Vec3 q(c.x() + radius * std::cos(a), c.y() + radius * std::sin(a), 0.0);
    return t == 0.0 || t == 1.0 ? snap(q) : q;
  });
}

/// Appends a canonical loop to a polyline that currently ends at `base`:
/// straight out to the circle of `radius` about `centre` at angle `phase`,
/// `turns` full turns (negative = clockwise) with `per_turn` vertices each,
/// and straight back to `base`. The loop winds `turns` times about `centre`
/// and zero times about any point outside its circle that the legs miss.
inline void append_loop(std::vector<Vec3>& poly, const Vec3& base, const Vec3& centre, double radius, int turns,
                        double phase, int per_turn = 24) {
  const int n = std::abs(turns) * per_turn;
  const double dir = turns > 0 ? 1.0 : -1.0;
  for (int k = 0; k <= n; ++k) {
    const double a = phase + dir * 2 * pi * k / per_turn;
    poly.push_back(centre + radius * Vec3(std::cos(a), std::sin(a), 0.0));
  }
  poly.push_back(base);
}

/// Two centres used by the Levi-Civita and Cauchy-Schwarz ensembles.
inline PotentialSpec two_centres() {
  return PotentialSpec({Centre{Vec3(0, 0, 0), 1.0, 1.0, 0.5}, Centre{Vec3(2.5, 0, 0), 0.7, 1.0, 0.5}});
}

/// Smooth random path between random endpoints near the first centre:
/// a chord plus a few sine modes.
struct RandomSmoothPath {
  Vec3 a, b;
  double c1 = 0, c2 = 0, c3 = 0;

  template <class Rng>
  static RandomSmoothPath draw(Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RandomSmoothPath p;
    p.a = Vec3(1.5 * u(rng), 0.5 + 0.3 * u(rng), 0.0);
    p.b = Vec3(1.5 * u(rng), -0.6 + 0.3 * u(rng), 0.0);
    p.c1 = 0.3 * u(rng);
    p.c2 = 0.3 * u(rng);
    p.c3 = 0.2 * u(rng);
    return p;
  }

  DiscretePath sample(int n) const {
    return from_function(n, [&](double t) {
      Vec3 q = (1 - t) * a + t * b;
      q.x() += 0.8 * std::sin(pi * t) + c1 * std::sin(2 * pi * t);
      q.y() += c2 * std::sin(pi * t) + c3 * std::sin(3 * pi * t);
      return q;
    });
  }
};

}  // namespace ncentre::testing
