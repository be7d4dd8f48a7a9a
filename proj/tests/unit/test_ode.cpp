#include <doctest.h>

#include "ncentre/errors.hpp"
#include "ncentre/minimizer.hpp"
#include "ncentre/ode.hpp"
#include "support.hpp"

using namespace ncentre;
using namespace ncentre::testing;

TEST_SUITE("ode") {
  TEST_CASE("circular orbit keeps its radius over one period") {
    const auto spec = unit_centre();
    const auto r = integrate(spec, PhaseState{Vec3(1, 0, 0), Vec3(0, 1, 0)}, 2 * pi);
    CHECK_FALSE(r.collision_stop);
    double drift = 0.0;
    for (const auto& p : r.positions) drift = std::max(drift, std::abs(p.norm() - 1.0));
    CHECK(drift <= 1e-6);
    CHECK((r.positions.back() - Vec3(1, 0, 0)).norm() <= 1e-6);
    CHECK(r.energy_drift <= 1e-8);
  }

  TEST_CASE("eccentric orbit conserves energy") {
    const PotentialSpec spec({Centre{Vec3(0, 0, 0), 1, 1, 0.5}, Centre{Vec3(3, 0, 0), 0.5, 1.5, 0.5}});
    const auto r = integrate(spec, PhaseState{Vec3(1, 0.5, 0), Vec3(0.1, 0.9, 0)}, 5.0);
    CHECK_FALSE(r.collision_stop);
    CHECK(r.energy_drift <= 1e-8);
  }

  TEST_CASE("radial drop ends in a collision stop") {
    const auto spec = unit_centre();
    const auto r = integrate(spec, PhaseState{Vec3(1, 0, 0), Vec3::Zero()}, 10.0);
    CHECK(r.collision_stop);
    // Free fall from rest at r = 1 reaches the centre at t = pi / (2 sqrt 2).
    CHECK(r.stop_time == doctest::Approx(pi / (2 * std::sqrt(2.0))).epsilon(1e-6));
    for (std::size_t i = 1; i < r.positions.size(); ++i) {
      CHECK(r.positions[i].norm() < r.positions[i - 1].norm());
      CHECK(std::abs(r.positions[i].y()) < 1e-15);
    }
  }

  TEST_CASE("time reversal") {
    const PotentialSpec spec({Centre{Vec3(0, 0, 0), 1, 1, 0.5}, Centre{Vec3(3, 0, 0), 0.5, 1, 0.5}});
    const PhaseState s0{Vec3(1, 0.5, 0), Vec3(0.2, 0.8, 0)};
    const auto fwd = integrate(spec, s0, 3.0);
    REQUIRE_FALSE(fwd.collision_stop);
    const auto back = integrate(spec, PhaseState{fwd.positions.back(), -fwd.velocities.back()}, 3.0);
    CHECK((back.positions.back() - s0.position).norm() <= 1e-6);
    CHECK((back.velocities.back() + s0.velocity).norm() <= 1e-6);
  }

  TEST_CASE("sampling at requested times") {
    const auto spec = unit_centre();
    const std::vector<double> ts{0.0, 0.5, 1.0, 1.5};
    const auto r = integrate(spec, PhaseState{Vec3(1, 0, 0), Vec3(0, 1, 0)}, 1.5, {}, ts);
    REQUIRE(r.times.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
      CHECK((r.positions[i] - Vec3(std::cos(ts[i]), std::sin(ts[i]), 0)).norm() <= 1e-9);
  }

  TEST_CASE("invalid configuration") {
    IntegratorConfig cfg;
    cfg.relative_tolerance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }

  TEST_CASE("verify_minimizer on a sampled analytic orbit") {
    // Unit circle at h = -1/2 swept through 1 rad: omega = 1. The start
    // velocity is a chord, off by 1/(2N) rad, so the grid is fine.
    const auto spec = unit_centre();
    const auto arc = circle_arc(1 << 17, 1.0, 0.0, 1.0);
    const auto rep = verify_minimizer(arc, 1.0, spec, -0.5);
    CHECK_FALSE(rep.collision_stop);
    CHECK(rep.duration == doctest::Approx(1.0));
    CHECK(rep.max_deviation <= 1e-5);
    CHECK(rep.max_energy_residual <= 1e-8);
  }

  TEST_CASE("verify_minimizer flags a path that is not a solution") {
    const auto spec = unit_centre();
    const auto spiral = spiral_path(Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3::Zero(), pi / 2, 512);
    const auto v = maupertuis(spiral, spec, 0.5);
    const auto rep = verify_minimizer(spiral, v.omega_sq, spec, 0.5);
    CHECK(rep.max_deviation > 1e-2 * rep.path_diameter);
  }
}
