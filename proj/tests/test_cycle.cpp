#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "slowman/cycle.hpp"

using namespace slowman;
using testing::two_pi;

namespace {

CycleSettings oracle_settings() {
  CycleSettings cs;
  cs.grid_N = 256;
  return cs;
}

FloquetSpectrum synthetic(std::vector<cplx> exponents, double T) {
  FloquetSpectrum sp;
  sp.T = T;
  sp.exponents = exponents;
  for (auto l : exponents) sp.multipliers.push_back(std::exp(l * T));
  sp.slow_index = 1;
  return sp;
}

}  // namespace

TEST_CASE("oracle cycle is the unit circle with period 2 pi") {
  const auto m = make_model("oracle");
  const auto c = find_cycle(*m, oracle_settings());
  CHECK(std::abs(c.T - two_pi) < 1e-10);
  REQUIRE(c.samples.points() == 256);
  for (std::size_t k = 0; k < 256; ++k) {
    const double th = two_pi * c.samples.theta(k);
    // phase origin at the maximum of x
    CHECK(std::abs(c.samples(0, k) - std::cos(th)) < 1e-10);
    CHECK(std::abs(c.samples(1, k) - std::sin(th)) < 1e-10);
  }
  CHECK(c.closure_residual < 1e-10);

  const auto again = sample_cycle(*m, c.anchor, c.T, 64);
  CHECK(again.samples.points() == 64);
  CHECK(std::abs(again.samples(1, 16) - 1.0) < 1e-10);
}

TEST_CASE("oracle Floquet spectrum") {
  const auto m = make_model("oracle");
  const auto c = find_cycle(*m, oracle_settings());
  FloquetSettings fs;
  fs.segments = 16;
  const auto sp = floquet_spectrum(*m, c, fs);
  REQUIRE(sp.dimension() == 2);
  CHECK(std::abs(sp.exponents[0]) < 1e-10);
  CHECK(std::abs(sp.exponents[1] - cplx(-2.0)) < 1e-8);
  CHECK(std::abs(sp.multipliers[1] - std::exp(-4 * M_PI)) < 1e-12);
  CHECK(sp.classes[0] == FloquetClass::trivial);
  CHECK(sp.classes[1] == FloquetClass::real_positive);
  CHECK(sp.slow_index == 1);
  // Liouville: log det Phi_T = int tr DX = -2 T on the circle
  CHECK(sp.trace_integral == doctest::Approx(-2 * two_pi).epsilon(1e-9));
  CHECK(sp.log_abs_det == doctest::Approx(sp.trace_integral).epsilon(1e-9));
  REQUIRE(sp.bundles.size() == 2);
  // the slow bundle is radial: |K_e1 . (-sin, cos)| vanishes
  for (std::size_t k = 0; k < 256; k += 17) {
    const double th = two_pi * c.samples.theta(k);
    CHECK(std::abs(-std::sin(th) * sp.bundles[1](0, k) + std::cos(th) * sp.bundles[1](1, k)) < 1e-9);
  }
}

TEST_CASE("resonance detection on a synthetic spectrum") {
  // 2 l1 = l2 exactly, and l1 + l3 = l3 + l1 is not a resonance by itself
  const auto sp = synthetic({0.0, -0.5, -1.0, {-0.77, 0.3}, {-0.77, -0.3}}, 4.0);
  const auto rep = check_resonances(sp, 3, 1e-8, 64);
  REQUIRE_FALSE(rep.flagged.empty());
  const auto it = std::find_if(rep.flagged.begin(), rep.flagged.end(), [](const ResonanceEntry& e) {
    return e.multi_index == std::vector<int>{2, 0, 0, 0} && e.target == 2;
  });
  CHECK(it != rep.flagged.end());
  CHECK(rep.min_residual < 1e-12);

  // resonances count modulo 2 pi i / T
  const double w = two_pi / 4.0;
  const auto shifted = synthetic({0.0, -0.5, {-1.0, w}, {-0.77, 0.3}, {-0.77, -0.3}}, 4.0);
  CHECK_FALSE(check_resonances(shifted, 3, 1e-8, 64).flagged.empty());

  const auto clean = synthetic({0.0, -0.5, -1.13, {-0.77, 0.3}, {-0.77, -0.3}}, 4.0);
  const auto ok = check_resonances(clean, 4, 1e-8, 64);
  CHECK(ok.flagged.empty());
  // number of multi-indices with 2 <= |a| <= 4 over 4 directions, times 4 targets
  CHECK(ok.entries.size() == (10 + 20 + 35) * 4);
  // divisor tables: manifold divisor at n = 2 is min_k |2 pi i k / T + 2 ls - lj|
  double expect = INFINITY;
  for (auto lj : clean.exponents) {
    for (long k = -32; k < 32; ++k) expect = std::min(expect, std::abs(cplx(0, w * k) + 2.0 * -0.5 - lj));
  }
  CHECK(ok.divisors.manifold.at(0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(check_resonances(clean, 1), InvalidArgument);
}

TEST_CASE("cyclic eigen-decomposition matches the product matrix") {
  std::vector<Eigen::MatrixXd> P;
  for (int i = 0; i < 4; ++i) {
    const auto v = testing::random_vector(9, 40 + i, -0.5, 0.5);
    Eigen::MatrixXd A = Eigen::Map<const Eigen::MatrixXd>(v.data(), 3, 3);
    A += Eigen::MatrixXd::Identity(3, 3);
    P.push_back(A);
  }
  const double T = 2.5;
  const Eigen::MatrixXd M = P[3] * P[2] * P[1] * P[0];
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  const auto ce = cyclic_eigen(P, T);
  REQUIRE(ce.exponents.size() == 3);
  for (const auto& l : ce.exponents) {
    const cplx mu = std::exp(l * T);
    double best = INFINITY;
    for (Eigen::Index i = 0; i < 3; ++i) best = std::min(best, std::abs(es.eigenvalues()(i) - mu));
    CHECK(best < 1e-12 * (1 + std::abs(mu)));
    CHECK(l.imag() > -M_PI / T);
    CHECK(l.imag() <= M_PI / T);
  }
  // P_i v_i = e^{lambda T / m} v_{i+1}
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& V = ce.node_vectors[j];
    const cplx step = std::exp(ce.exponents[j] * T / 4.0);
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXcd lhs = P[i].cast<cplx>() * V.col(i);
      CHECK((lhs - step * V.col(i + 1)).norm() < 1e-12 * V.norm());
    }
  }
}

TEST_CASE("cycle settings are validated") {
  const auto m = make_model("oracle");
  CycleSettings cs = oracle_settings();
  cs.grid_N = 100;
  CHECK_THROWS_AS(find_cycle(*m, cs), InvalidArgument);
  cs = oracle_settings();
  cs.guess = {1.0};
  CHECK_THROWS_AS(find_cycle(*m, cs), InvalidArgument);
  // the origin is an unstable equilibrium: no cycle through it
  cs = oracle_settings();
  cs.guess = {0.0, 0.0};
  cs.relax_time = 0.0;
  CHECK_THROWS_AS(find_cycle(*m, cs), NumericalError);
}
