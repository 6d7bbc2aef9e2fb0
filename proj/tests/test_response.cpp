#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracle_fixture.hpp"

using namespace slowman;
using testing::two_pi;

TEST_CASE("oracle Z_n and I_n in closed form") {
  const auto& o = testing::oracle_run();
  const auto& r = o.response;
  REQUIRE(r.order() == 5);
  // grad Theta on K = (1 - 2 s sigma)^{1/2} (-sin, cos) / (2 pi)
  // grad Sigma on K = s (1 - 2 s sigma)^{3/2} (cos, sin)
  const auto z = testing::binomial_series(0.5, 5);
  const auto i = testing::binomial_series(1.5, 5);
  const double s = o.sign;
  for (std::size_t n = 0; n <= 5; ++n) {
    const double sn = std::pow(s, double(n));
    double ez = 0.0, ei = 0.0;
    for (std::size_t g = 0; g < r.Z[n].points(); ++g) {
      const double th = two_pi * r.Z[n].theta(g);
      ez = std::max({ez, std::abs(r.Z[n](0, g) + sn * z[n] * std::sin(th) / two_pi),
                     std::abs(r.Z[n](1, g) - sn * z[n] * std::cos(th) / two_pi)});
      ei = std::max({ei, std::abs(r.I[n](0, g) - s * sn * i[n] * std::cos(th)),
                     std::abs(r.I[n](1, g) - s * sn * i[n] * std::sin(th))});
    }
    CAPTURE(n);
    CHECK(ez < 1e-9);
    CHECK(ei < 1e-9);
    CHECK(r.z_orders[n].relative_residual < 1e-9);
    CHECK(r.i_orders[n].relative_residual < 1e-9);
  }
  CHECK(r.solvability_residual < 1e-9);
  CHECK(r.normalization_residual < 1e-9);
  CHECK(r.wilson_residual < 1e-9);
}

TEST_CASE("response series off the grid") {
  const auto& o = testing::oracle_run();
  const double th = 0.377, sg = 0.012, s = o.sign;
  const double c = std::cos(two_pi * th), sn = std::sin(two_pi * th);
  // truncated at order 5, so compare with the degree-5 polynomials
  const auto z = testing::binomial_series(0.5, 5), i = testing::binomial_series(1.5, 5);
  double pz = 0.0, pi = 0.0;
  for (std::size_t n = 0; n <= 5; ++n) {
    pz += z[n] * std::pow(s * sg, double(n));
    pi += i[n] * std::pow(s * sg, double(n));
  }
  const auto Z = evaluate_phase_response(o.response, th, sg);
  const auto I = evaluate_amplitude_response(o.response, th, sg);
  CHECK(std::abs(Z[0] + pz * sn / two_pi) < 1e-11);
  CHECK(std::abs(Z[1] - pz * c / two_pi) < 1e-11);
  CHECK(std::abs(I[0] - s * pi * c) < 1e-10);
  CHECK(std::abs(I[1] - s * pi * sn) < 1e-10);
}

TEST_CASE("Jacobian-transpose coefficients and the recursion pieces") {
  const auto& o = testing::oracle_run();
  const auto F = jacobian_transpose_coefficients(*o.model, o.manifold, 5);
  REQUIRE(F.size() == 6);
  CHECK(F[0].arity() == 4);
  // F_0 = DX(gamma)^T; at theta = 0, gamma = (1, 0): DX = [[-2, -1], [1, 0]]
  CHECK(F[0](0, 0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(F[0](1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(F[0](2, 0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(F[0](3, 0)) < 1e-9);

  const auto& r = o.response;
  const std::vector<RealGrid> Zlow(r.Z.begin(), r.Z.begin() + 2);
  const auto Z2 = next_order_Zn(F, Zlow, o.bundle, o.adjoint, o.manifold.lambda_s, 2);
  CHECK(testing::grid_max_diff(Z2, r.Z[2]) < 1e-14);
  const auto res = adjoint_homological_residual(F, r.Z, 2, r.T, 2 * o.manifold.lambda_s);
  CHECK(res.relative < 1e-9);
  // the I-recursion at n = 1 leaves a free multiple of Z_0
  const std::vector<RealGrid> Ilow(r.I.begin(), r.I.begin() + 1);
  double h0 = -1.0;
  const auto I1p = next_order_In(F, Ilow, o.bundle, o.adjoint, o.manifold.lambda_s, 1, 1e-8, nullptr, &h0);
  CHECK(h0 >= 0.0);
  CHECK(h0 < 1e-9);
  RealGrid diff = r.I[1];
  for (std::size_t k = 0; k < diff.data().size(); ++k) diff.data()[k] -= I1p.data()[k] + r.free_coefficient * r.Z[0].data()[k];
  CHECK(max_abs(diff) < 1e-12);
}
