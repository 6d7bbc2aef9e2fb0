#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "slowman/ode.hpp"

using namespace slowman;

namespace {

// oracle flow from (r0, 0): r^2 = 1 / (1 + c e^{-2t}), c = 1/r0^2 - 1, angle t
std::vector<double> oracle_exact(double r0, double t) {
  const double c = 1.0 / (r0 * r0) - 1.0;
  const double r = 1.0 / std::sqrt(1.0 + c * std::exp(-2.0 * t));
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace

TEST_CASE("oracle flow against the closed form") {
  const auto m = make_model("oracle");
  const std::vector<double> x0{2.0, 0.0};
  for (double t : {0.5, 3.0, 10.0}) {
    const auto x = flow(*m, x0, t);
    const auto e = oracle_exact(2.0, t);
    CHECK(std::abs(x[0] - e[0]) < 1e-10);
    CHECK(std::abs(x[1] - e[1]) < 1e-10);
  }
  const std::vector<double> times{0.0, 0.25, 1.0, 1.0, 4.0};
  const auto xs = flow_samples(*m, x0, times);
  REQUIRE(xs.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto e = oracle_exact(2.0, times[k]);
    CHECK(std::abs(xs[k][0] - e[0]) < 1e-10);
  }
  // backwards and forwards
  const auto back = flow(*m, flow(*m, x0, 1.0), -1.0);
  CHECK(std::abs(back[0] - 2.0) < 1e-10);
  CHECK(flow(*m, x0, 0.0) == x0);
}

TEST_CASE("variational flow against differences of the flow") {
  const auto m = make_model("oracle");
  const std::vector<double> x0{0.7, 0.4};
  const double t = 1.7, h = 1e-6;
  const auto v = flow_with_variational(*m, x0, t);
  for (std::size_t j = 0; j < 2; ++j) {
    auto xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    const auto fp = flow(*m, xp, t), fm = flow(*m, xm, t);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(v.phi(i, j) - (fp[i] - fm[i]) / (2 * h)) < 1e-7);
  }
  // Liouville: det Phi = exp(int tr DX)
  CHECK(v.phi.determinant() == doctest::Approx(std::exp(v.trace_integral)).epsilon(1e-10));
}

TEST_CASE("duality of the fundamental solutions on the oracle cycle") {
  const auto m = make_model("oracle");
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<double> times{1.0, testing::two_pi};
  // |Psi(T)| grows like e^{4 pi} ~ 3e5, so the bound is about 10 rtol e^{4 pi}
  const double growth = std::exp(4 * M_PI);
  const auto work = fundamental_duality(*m, x0, times, {}, Precision::working);
  REQUIRE(work.deviation.size() == 2);
  CHECK(work.deviation[1] < 10 * 1e-12 * growth);
  IntegratorSettings tight;
  tight.rtol = 1e-20;
  tight.atol = 1e-22;
  const auto wide = fundamental_duality(*m, x0, times, tight, Precision::extended);
  CHECK(wide.deviation[1] < 10 * 1e-20 * growth);
  CHECK(wide.deviation[1] < 1e-3 * work.deviation[1]);
}

TEST_CASE("adjoint and linearized flows on an interpolated cycle") {
  const auto m = make_model("oracle");
  const std::size_t N = 64;
  RealGrid g(2, N);
  for (std::size_t k = 0; k < N; ++k) {
    g(0, k) = std::cos(testing::two_pi * g.theta(k));
    g(1, k) = std::sin(testing::two_pi * g.theta(k));
  }
  const CycleInterpolant cyc(g, testing::two_pi);
  const auto p = cyc.evaluate(testing::two_pi / 4);
  CHECK(std::abs(p[0]) < 1e-14);
  CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-14));

  // on the unit circle Phi_T has eigenvalues 1 and e^{-4 pi}; Psi_T = Phi_T^{-T}
  const std::vector<double> T{testing::two_pi};
  const auto phi = linearized_flow_samples(*m, cyc, T)[0];
  const auto psi = adjoint_flow_samples(*m, cyc, T)[0];
  CHECK((psi.transpose() * phi - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 10 * 1e-12 * std::exp(4 * M_PI));
  CHECK(phi.determinant() == doctest::Approx(std::exp(-4 * M_PI)).epsilon(1e-8));
}

TEST_CASE("integrator settings are validated") {
  IntegratorSettings s;
  s.rtol = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  const auto m = make_model("oracle");
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(flow(*m, bad, 1.0), InvalidArgument);
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<double> unsorted{1.0, 0.5};
  CHECK_THROWS_AS(flow_samples(*m, x0, unsorted), InvalidArgument);
  IntegratorSettings few;
  few.max_steps = 3;
  CHECK_THROWS_AS(flow(*m, x0, 100.0, few), IntegrationError);
}
