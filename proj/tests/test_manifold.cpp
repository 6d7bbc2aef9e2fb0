#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracle_fixture.hpp"

using namespace slowman;
using testing::two_pi;

TEST_CASE("oracle K_n are the radial coefficients of (1 - 2 sigma)^(-1/2)") {
  const auto& o = testing::oracle_run();
  const auto& m = o.manifold;
  REQUIRE(m.order() == 5);
  CHECK(m.lambda_s == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(m.gauge == doctest::Approx(1.0).epsilon(1e-12));
  const auto a = testing::binomial_series(-0.5, 5);
  for (std::size_t n = 0; n <= 5; ++n) {
    const double cn = std::pow(o.sign, double(n)) * a[n];
    double err = 0.0;
    for (std::size_t g = 0; g < m.points(); ++g) {
      const double th = two_pi * m.K[n].theta(g);
      err = std::max({err, std::abs(m.K[n](0, g) - cn * std::cos(th)), std::abs(m.K[n](1, g) - cn * std::sin(th))});
    }
    CAPTURE(n);
    CHECK(err < 1e-8);
    CHECK(m.orders[n].relative_residual < 1e-9);
  }
  CHECK(m.warnings.empty());
}

TEST_CASE("off-grid evaluation and derivatives") {
  const auto& o = testing::oracle_run();
  const auto a = testing::binomial_series(-0.5, 5);
  for (double th : {0.1234, 0.75, 0.9}) {
    for (double sg : {-0.03, 0.0, 0.02}) {
      const double s = o.sign * sg;
      double P = 0.0, dP = 0.0;
      for (std::size_t n = 0; n <= 5; ++n) {
        P += a[n] * std::pow(s, double(n));
        if (n > 0) dP += double(n) * a[n] * std::pow(s, double(n - 1)) * o.sign;
      }
      const double c = std::cos(two_pi * th), sn = std::sin(two_pi * th);
      const auto x = evaluate_manifold(o.manifold, th, sg);
      CHECK(std::abs(x[0] - P * c) < 1e-12);
      CHECK(std::abs(x[1] - P * sn) < 1e-12);
      const auto j = evaluate_manifold_jet(o.manifold, th, sg);
      CHECK(std::abs(j.d_theta[0] + two_pi * P * sn) < 1e-10);
      CHECK(std::abs(j.d_sigma[1] - dP * sn) < 1e-10);
    }
  }
  const auto xg = evaluate_manifold_at(o.manifold, 64, 0.01);
  const auto xi = evaluate_manifold(o.manifold, o.manifold.K[0].theta(64), 0.01);
  CHECK(std::abs(xg[0] - xi[0]) < 1e-14);
}

TEST_CASE("homological residual and inhomogeneity") {
  const auto& o = testing::oracle_run();
  for (std::size_t n = 0; n <= 5; ++n) {
    const auto r = homological_residual(*o.model, o.manifold.K, n, o.manifold.T, o.manifold.lambda_s);
    CHECK(r.relative < 1e-9);
  }
  // B_2 of X(K_0 + K_1 s): the cubic term -|x|^2 x gives -3 K_0 s^2 along r-hat
  // with K_1 = sign r-hat, so B_2 = -3 (cos, sin) (sign^2 = 1)
  const auto B2 = manifold_inhomogeneity(*o.model, o.manifold.K, 2);
  for (std::size_t g = 0; g < B2.points(); g += 9) {
    const double th = two_pi * B2.theta(g);
    CHECK(std::abs(B2(0, g) + 3 * std::cos(th)) < 1e-9);
    CHECK(std::abs(B2(1, g) + 3 * std::sin(th)) < 1e-9);
  }
  // recomputing an order from the lower ones gives it back
  const std::vector<RealGrid> lower(o.manifold.K.begin(), o.manifold.K.begin() + 3);
  const auto K3 = next_order_Kn(*o.model, lower, o.bundle, o.adjoint, o.manifold.lambda_s, 3);
  CHECK(testing::grid_max_diff(K3, o.manifold.K[3]) < 1e-13);
  CHECK_THROWS_AS(next_order_Kn(*o.model, lower, o.bundle, o.adjoint, o.manifold.lambda_s, 1), InvalidArgument);
}

TEST_CASE("reloaded coefficients evaluate the same") {
  const auto& o = testing::oracle_run();
  ManifoldExpansion copy;
  copy.T = o.manifold.T;
  copy.lambda_s = o.manifold.lambda_s;
  copy.K = o.manifold.K;
  copy.finalize();
  CHECK(copy.dK.size() == copy.K.size());
  const auto a = evaluate_manifold(copy, 0.31, 0.015);
  const auto b = evaluate_manifold(o.manifold, 0.31, 0.015);
  CHECK(a == b);
  CHECK(o.manifold.series().order() == 5);
}

TEST_CASE("a complex slow exponent is refused") {
  const auto& o = testing::oracle_run();
  auto sp = o.spectrum;
  sp.classes[1] = FloquetClass::complex_pair_lead;
  CHECK_THROWS_AS(expand_slow_manifold(*o.model, o.cycle, sp, o.bundle, o.adjoint), NumericalError);
}
