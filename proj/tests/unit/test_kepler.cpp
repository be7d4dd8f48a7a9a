#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ncentre/errors.hpp"
#include "ncentre/kepler.hpp"
#include "support.hpp"

using namespace ncentre;
using namespace ncentre::testing;

namespace {

// Raw integrand with both endpoint singularities left in place. Near xi = 1
// the quadrature hands over the exact distance 1 - xi, and
// xi^alpha - xi^2 = xi^alpha (1 - xi^(2 - alpha)) is formed without
// cancellation; xi^(-alpha/2) is taken in log space so it cannot underflow.
double angle_oracle(double alpha) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [alpha](double xi, double xc) {
    const double log_xi = xc > 0 ? std::log1p(-xc) : std::log(xi);
    const double gap = -std::expm1((2 - alpha) * log_xi);
    return std::exp(-0.5 * alpha * log_xi) / std::sqrt(gap);
  };
  return integrator.integrate(f, 0.0, 1.0);
}

// Radial power law |t - 1/2|^beta about the origin, in along +x, out along +y.
DiscretePath power_bounce(double beta, int n) {
  return from_function(n, [&](double t) {
    const double r = std::pow(std::abs(2 * t - 1), beta);
    return t < 0.5 ? Vec3(r, 0, 0) : Vec3(0, r, 0);
  });
}

}  // namespace

TEST_SUITE("kepler") {
  TEST_CASE("parabolic angle closed form") {
    CHECK(std::abs(parabolic_angle_quadrature(1.0) - pi) < 1e-10);
    CHECK(std::abs(parabolic_angle_quadrature(0.5) - 2 * pi / 3) < 1e-10);
    CHECK(std::abs(parabolic_angle_quadrature(1.9) - 10 * pi) < 1e-8);
  }

  TEST_CASE("parabolic angle against tanh-sinh on the raw integrand") {
    for (double alpha : {0.1, 0.25, 0.5, 1.0, 4.0 / 3.0, 1.5, 1.9}) {
      CAPTURE(alpha);
      CHECK(parabolic_angle_quadrature(alpha) == doctest::Approx(angle_oracle(alpha)).epsilon(1e-8));
    }
  }

  TEST_CASE("alpha out of range") {
    for (double alpha : {0.0, 2.0, -1.0, 3.0}) {
      try {
        parabolic_angle_quadrature(alpha);
        FAIL("expected AlphaOutOfRange");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::alpha_out_of_range);
      }
    }
  }

  TEST_CASE("min_total_angle") {
    CHECK(min_total_angle(1.0) == doctest::Approx(2 * pi));
    CHECK(min_total_angle(4.0 / 3.0) == doctest::Approx(3 * pi));
    CHECK(std::abs(min_total_angle(1e-6) - pi) < 1e-5);
  }

  TEST_CASE("collision exponent on exact power laws") {
    const PotentialSpec one = unit_centre(1.0);
    CHECK(std::abs(fit_collision_exponent(power_bounce(2.0 / 3.0, 1024), one, 0, 0.5) - 2.0 / 3.0) < 2e-2);
    const PotentialSpec steep = unit_centre(1.5);
    CHECK(std::abs(fit_collision_exponent(power_bounce(2.0 / 3.5, 1024), steep, 0, 0.5) - 2.0 / 3.5) < 2e-2);
  }

  TEST_CASE("collision exponent needs data") {
    // Everything stays far from the centre.
    const auto far = circle_arc(64, 2.0, 0.0, 1.0);
    CHECK_THROWS_AS(fit_collision_exponent(far, unit_centre(), 0, 0.5), Error);
  }

  TEST_CASE("angular momentum series") {
    for (double c : angular_momentum_series(circle_arc(64, 1.0, 0.3, 1.3), Vec3::Zero()))
      CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
    const auto radial = DiscretePath::straight(Vec3(2, 1, 0), Vec3(4, 2, 0), 32);
    for (double c : angular_momentum_series(radial, Vec3::Zero())) CHECK(std::abs(c) < 1e-14);
  }

  TEST_CASE("regression slope") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    CHECK(regression_slope(x, y) == doctest::Approx(2.0));
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(regression_slope(one, one), Error);
  }

  TEST_CASE("blow-up report on a synthetic bounce") {
    const auto spec = unit_centre();
    const auto b = blowup_report(power_bounce(2.0 / 3.0, 1024), spec, 0, 1.0);
    CHECK(b.exponent_available);
    CHECK(b.oracle_exponent == doctest::Approx(2.0 / 3.0));
    CHECK(b.oracle_angle == doctest::Approx(2 * pi));
  }
}
