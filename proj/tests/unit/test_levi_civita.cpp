#include <doctest.h>

#include <algorithm>
#include <random>

#include "ncentre/errors.hpp"
#include "ncentre/levi_civita.hpp"
#include "ncentre/minimizer.hpp"
#include "support.hpp"

using namespace ncentre;
using namespace ncentre::testing;

namespace {

double sup(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

LCPath synthetic(int n, auto&& w_of_tau) {
  LCPath lc;
  lc.S = 1.0;
  lc.w.resize(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) lc.w[j] = w_of_tau(double(j) / n);
  return lc;
}

double relative_residual(const LCPath& lc, const PotentialSpec& spec, double h, int centre) {
  const auto f = regularized_maupertuis(lc, spec, h, centre);
  const auto r = lc_ode_residual(lc, f.omega_sq, spec, h, centre, LCForm::euler_lagrange);
  return sup(r) / lc_ode_scale(lc, f.omega_sq, spec, h, centre, LCForm::euler_lagrange);
}

}  // namespace

TEST_SUITE("levi_civita") {
  TEST_CASE("constant path") {
    const auto spec = unit_centre();
    const auto c = DiscretePath::straight(Vec3(1, 0, 0), Vec3(1, 0, 0), 16);
    const auto lc = to_lc(c, spec, 0);
    CHECK(lc.S == doctest::Approx(1.0));
    for (const auto& w : lc.w) CHECK(std::abs(w - Complex(1.0, 0.0)) < 1e-14);
    CHECK(regularized_maupertuis(lc, spec, 0.0, 0).kinetic == 0.0);
  }

  TEST_CASE("circular arc: S, total time and round trip") {
    const auto spec = unit_centre();
    const auto arc = circle_arc(1024, 0.7, 0.2, 2.2);
    const auto lc = to_lc(arc, spec, 0);
    CHECK(lc.S == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
    CHECK(lc_total_time(lc) == doctest::Approx(1.0).epsilon(1e-12));
    const auto back = from_lc(lc);
    double err = 0.0;
    for (int i = 0; i <= 1024; ++i) err = std::max(err, (back.node(i) - arc.node(i)).norm());
    CHECK(err <= 1e-8);
    const auto d = lc_diagnostics(arc, spec, 0.5, 0);
    CHECK(std::abs(d.ratio / 2 - 1) < 1e-6);
  }

  TEST_CASE("regularized functional is twice M_h on random paths") {
    const auto spec = two_centres();
    std::mt19937_64 rng(7);
    int used = 0;
    while (used < 5) {
      const auto path = RandomSmoothPath::draw(rng).sample(2048);
      if (min_distance(path, spec).distance < 0.1) continue;
      ++used;
      const auto d = lc_diagnostics(path, spec, 0.3, 0);
      CHECK(std::abs(d.ratio / 2 - 1) <= 1e-6);
      CHECK(d.max_roundtrip_error <= 1e-8);
    }
  }

  TEST_CASE("harmonic reduction") {
    // V0 = 0, h = 0: omega^2 w'' = -2 w is solved by any sinusoid of
    // frequency sqrt(2 / omega^2).
    const double om2 = 0.8, k = std::sqrt(2 / om2);
    const auto lc = synthetic(1024, [&](double t) { return Complex(std::sin(k * t + 0.3), 0.5 * std::cos(k * t)); });
    CHECK(sup(lc_ode_residual(lc, om2, unit_centre(), 0.0, 0, LCForm::displayed)) <= 1e-6);
    // The stationarity form has no -2w term, so the same curve fails it.
    CHECK(sup(lc_ode_residual(lc, om2, unit_centre(), 0.0, 0, LCForm::euler_lagrange)) > 0.1);
  }

  TEST_CASE("random path has a nonzero residual") {
    std::mt19937_64 rng(9);
    const auto spec = two_centres();
    const auto path = RandomSmoothPath::draw(rng).sample(256);
    CHECK(relative_residual(to_lc(path, spec, 0), spec, 0.3, 0) > 1e-3);
  }

  TEST_CASE("odd symmetry") {
    const auto odd = synthetic(256, [](double t) { return Complex(std::sin(pi * (t - 0.5)), 0.0); });
    CHECK(lc_symmetry_check(odd, 0.5, 1e-12));
    const auto generic = synthetic(256, [](double t) { return Complex(1.0 + t, t * t); });
    CHECK_FALSE(lc_symmetry_check(generic, 0.5, 5e-2));
  }

  TEST_CASE("errors") {
    const auto spec = unit_centre(1.5);
    CHECK_THROWS_AS(to_lc(circle_arc(64, 1.0, 0.0, 1.0), spec, 0), Error);
    try {
      to_lc(DiscretePath::straight(Vec3(0, 0, 0), Vec3(1, 0, 0), 8), unit_centre(), 0);
      FAIL("expected DistanceZero");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::distance_zero);
    }
  }

  TEST_CASE("smooth minimizer satisfies the regularized equation") {
    const auto spec = unit_centre();
    const Vec3 p1(1, 0, 0), p2(0, 1, 0);
    const auto closure = ClosurePath::canonical(spec, p1, p2);
    const auto path0 = spiral_path(p1, p2, Vec3::Zero(), pi / 2, 512);
    const auto cls = HomotopyClass::indices(std::vector<int>{closed_index(path0, closure, Vec3::Zero())}, closure);
    const auto r = minimize_in_class(path0, cls, spec, 0.5);
    REQUIRE(r.converged);
    CHECK(relative_residual(to_lc(r.path, spec, 0), spec, 0.5, 0) <= 1e-2);
  }

  // Known gap: the midpoint M_h misweights the collision segment, which
  // leaves an O(1) residual next to the collision at N = 1024.
  TEST_CASE("collision-ejection minimizer across the collision" * doctest::may_fail()) {
    const PotentialSpec spec({Centre{Vec3(0, 0, 0), 1, 1, 1}, Centre{Vec3(2.5, 0, 0), 1, 1, 1}});
    const Vec3 p(-1, 0, 0);
    const auto closure = ClosurePath::canonical(spec, p, p);
    const auto base = lasso_path(spec, p, p, closure, {1, 0}, 1024);
    const auto r = minimize_in_class(base, HomotopyClass::parities(std::vector<int>{1, 0}, closure), spec, 0.5);
    REQUIRE(r.classification == Classification::collision_ejection);
    const auto lc = to_lc(r.path, spec, 0);
    const double tau1 = lc_tau_at(lc, r.collisions.candidates.at(0).time);
    CHECK(lc_symmetry_check(lc, tau1, 5e-2));
    CHECK(relative_residual(lc, spec, 0.5, 0) <= 1e-2);
  }
}
