#include <doctest.h>

#include <complex>
#include <random>

#include "ncentre/errors.hpp"
#include "ncentre/homotopy.hpp"
#include "ncentre/minimizer.hpp"
#include "support.hpp"

using namespace ncentre;
using namespace ncentre::testing;

namespace {

// 1/(2 pi i) times the contour integral of dz / (z - c) by dense midpoint
// sampling of every segment; shares nothing with the angle bookkeeping.
double winding_quadrature(std::span<const Vec3> poly, const Vec3& c) {
  std::complex<double> sum = 0.0;
  const std::complex<double> zc(c.x(), c.y());
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const std::complex<double> a(poly[i].x(), poly[i].y()), b(poly[i + 1].x(), poly[i + 1].y());
    const int m = 400;
    for (int k = 0; k < m; ++k) {
      const std::complex<double> z = a + (b - a) * ((k + 0.5) / m);
      sum += (b - a) / double(m) / (z - zc);
    }
  }
  return sum.imag() / (2 * pi);
}

PotentialSpec five_centres() {
  std::vector<Centre> cs;
  for (int k = 0; k < 5; ++k) cs.push_back(Centre{Vec3(3.0 * k, 0, 0), 1.0, 1.0, 0.5});
  return PotentialSpec(cs);
}

}  // namespace

TEST_SUITE("homotopy") {
  TEST_CASE("angle_between") {
    const Vec3 o = Vec3::Zero();
    CHECK(angle_between(Vec3(1, 0, 0), Vec3(0, 1, 0), o) == doctest::Approx(pi / 2));
    CHECK(angle_between(Vec3(1, 0, 0), Vec3(1, 0, 0), o) == 0.0);
    CHECK(angle_between(Vec3(1, 0, 0), Vec3(0, -1, 0), o) == doctest::Approx(3 * pi / 2));
    CHECK_THROWS_AS(angle_between(o, Vec3(1, 0, 0), o), Error);
  }

  TEST_CASE("accumulated_angle") {
    std::vector<Vec3> polygon;
    for (int k = 0; k <= 64; ++k) polygon.emplace_back(std::cos(2 * pi * k / 64), std::sin(2 * pi * k / 64), 0.0);
    CHECK(std::abs(accumulated_angle(polygon, Vec3::Zero()) - 2 * pi) < 1e-12);

    const std::vector<Vec3> straight{Vec3(1, 0, 0), Vec3(2, 0, 0)};
    CHECK(accumulated_angle(straight, Vec3::Zero()) == 0.0);

    // Bulging curve in the right half-plane; the dense analytic angle of its
    // parametrization is atan2 at the ends.
    const auto bulge = from_function(256, [](double t) { return Vec3(1 + std::sin(pi * t), 2 * t - 1, 0.0); });
    const double a = accumulated_angle(bulge, Vec3::Zero());
    CHECK(a > 0.0);
    CHECK(a < pi);
    CHECK(a == doctest::Approx(angle_between(Vec3(1, -1, 0), Vec3(1, 1, 0), Vec3::Zero())).epsilon(1e-12));

    const std::vector<Vec3> through{Vec3(-1, 0, 0), Vec3(1, 0, 0)};
    CHECK_THROWS_AS(accumulated_angle(through, Vec3::Zero()), Error);
  }

  TEST_CASE("closed_index of simple loops") {
    const auto spec = unit_centre();
    const Vec3 p(1, 0, 0);
    const ClosurePath closure({p, p});
    const auto circle = circle_arc(64, 1.0, 0.0, 2 * pi);
    CHECK(closed_index(circle, closure, Vec3::Zero()) == 1);
    CHECK(closed_index(circle, closure, Vec3(5, 5, 0)) == 0);

    // Twice around the origin from (1, 0), closed by a degenerate closure.
    const auto twice = circle_arc(128, 1.0, 0.0, 4 * pi);
    const int idx = closed_index(twice, closure, Vec3::Zero());
    CHECK(idx == 2);
    CHECK(std::lround(winding_quadrature(twice.nodes(), Vec3(0.1, -0.2, 0))) == idx);
  }

  TEST_CASE("open path closed by the canonical closure") {
    const auto spec = unit_centre();
    const Vec3 p1(1, 0, 0), p2(-1, 0, 0);
    const auto closure = ClosurePath::canonical(spec, p1, p2);
    const auto upper = circle_arc(64, 1.0, 0.0, pi);
    const auto lower = circle_arc(64, 1.0, 0.0, -pi);
    const int a = closed_index(upper, closure, Vec3::Zero());
    const int b = closed_index(lower, closure, Vec3::Zero());
    CHECK(std::abs(a - b) == 1);
    const auto three = circle_arc(64, 1.0, 0.0, 3 * pi);
    CHECK(closed_index(three, closure, Vec3::Zero()) - a == 1);

    std::vector<Vec3> loop(upper.nodes());
    for (const auto& w : closure.waypoints()) loop.push_back(w);
    CHECK(std::lround(winding_quadrature(loop, Vec3::Zero())) == a);
  }

  TEST_CASE("winding vectors with five centres") {
    const auto spec = five_centres();
    const Vec3 base(6.0, -2.0, 0.0);
    const auto closure = ClosurePath::canonical(spec, base, base);

    std::vector<Vec3> far{base, Vec3(6.0, -2.5, 0.0), base};
    std::vector<int> zero(5, 0);
    // Straight path away from the centres, closed back along itself.
    CHECK(winding_vector(resample_polyline(far, 16, Mode::planar), closure, spec) == zero);

    std::vector<Vec3> one{base};
    append_loop(one, base, spec.centre(2).position, 0.6, 1, -pi / 2);
    const auto p3 = resample_polyline(one, 256, Mode::planar);
    CHECK(winding_vector(p3, closure, spec) == std::vector<int>{0, 0, 1, 0, 0});

    std::vector<Vec3> two{base};
    append_loop(two, base, spec.centre(0).position, 0.6, 1, -0.3);
    append_loop(two, base, spec.centre(2).position, 0.6, 1, -pi / 2);
    const auto p13 = resample_polyline(two, 512, Mode::planar);
    CHECK(parity_class(p13, closure, spec) == std::vector<int>{1, 0, 1, 0, 0});
  }

  TEST_CASE("index ranges at collision nodes") {
    const auto spec = unit_centre();
    const Vec3 p1(1, 0, 0), p2(-1, 0, 0);
    const auto closure = ClosurePath::canonical(spec, p1, p2);
    // Straight through the centre with a node exactly on it.
    const auto through = DiscretePath::straight(p1, p2, 8);
    const auto r = index_range(through, closure, Vec3::Zero());
    CHECK(r.hi - r.lo == 1);
    CHECK_THROWS_AS(closed_index(through, closure, Vec3::Zero()), Error);

    const auto upper = circle_arc(8, 1.0, 0.0, pi);
    const auto lower = circle_arc(8, 1.0, 0.0, -pi);
    const int a = closed_index(upper, closure, Vec3::Zero());
    const int b = closed_index(lower, closure, Vec3::Zero());
    CHECK(std::min(a, b) == r.lo);
    CHECK(std::max(a, b) == r.hi);
  }

  TEST_CASE("refinement keeps the index") {
    const auto spec = unit_centre();
    const Vec3 p(1, 0, 0);
    const ClosurePath closure({p, p});
    auto path = circle_arc(16, 1.0, 0.0, 6 * pi);
    const int idx = closed_index(path, closure, Vec3::Zero());
    for (int k = 0; k < 4; ++k) {
      path = refine(path);
      CHECK(closed_index(path, closure, Vec3::Zero()) == idx);
    }
  }

  TEST_CASE("step_preserves_class") {
    const auto spec = unit_centre();
    const Vec3 p1(1, 0, 0), p2(-1, 0, 0);
    const auto closure = ClosurePath::canonical(spec, p1, p2);
    const auto upper = circle_arc(16, 1.0, 0.0, pi);
    const std::vector<int> idx{closed_index(upper, closure, Vec3::Zero())};
    const auto cls = HomotopyClass::indices(idx, closure);
    CHECK(step_preserves_class(upper, upper, cls, spec));

    // Push the top node straight down past the centre.
    DiscretePath crossed = upper;
    crossed.set_interior(8, Vec3(0, -0.5, 0));
    CHECK_FALSE(step_preserves_class(upper, crossed, cls, spec));
    // The crossing shows up in the index of the dragged path.
    DiscretePath deep = upper;
    for (int i = 1; i < 16; ++i) {
      Vec3 q = deep.node(i);
      q.y() = -q.y();
      deep.set_interior(i, q);
    }
    CHECK(closed_index(deep, closure, Vec3::Zero()) != idx[0]);
    CHECK_FALSE(step_preserves_class(upper, deep, cls, spec));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double clearance = min_distance(upper, spec).distance;
    for (int trial = 0; trial < 50; ++trial) {
      DiscretePath moved = upper;
      for (int i = 1; i < 16; ++i) moved.set_interior(i, upper.node(i) + 0.4 * clearance * Vec3(u(rng), u(rng), 0));
      CHECK(step_preserves_class(upper, moved, cls, spec));
    }
  }

  TEST_CASE("parity constraints") {
    CHECK(WindingConstraint::parity(1).accepts(-3));
    CHECK_FALSE(WindingConstraint::parity(0).accepts(-3));
    CHECK(WindingConstraint::exact(2).accepts(2));
    CHECK(WindingConstraint{}.accepts(17));
  }
}
