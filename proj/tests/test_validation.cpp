#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracle_fixture.hpp"
#include "slowman/validation.hpp"

using namespace slowman;
using testing::two_pi;

namespace {

// For K = P(u) r-hat, u = s sigma, with P the degree-L truncation of
// (1 - 2u)^{-1/2}, the residual of the invariance equation is radial:
//   E = | -2 u P'(u) - (1 - P^2) P |, independent of theta.
double oracle_residual(double u, std::size_t L) {
  const auto a = testing::binomial_series(-0.5, L);
  double P = 0.0, dP = 0.0;
  for (std::size_t n = L + 1; n-- > 0;) {
    P = P * u + a[n];
    if (n > 0) dP = dP * u + double(n) * a[n];
  }
  return std::abs(-2.0 * u * dP - (1.0 - P * P) * P);
}

// first u along +direction where the residual reaches tol
double oracle_bound(double tol, double direction, std::size_t L) {
  double lo = 0.0, hi = 1e-3;
  while (oracle_residual(direction * hi, L) < tol) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_residual(direction * mid, L) < tol ? lo : hi) = mid;
  }
  return lo;
}

const AccuracyDomain& oracle_domain() {
  static const AccuracyDomain d = accuracy_domain(*testing::oracle_run().model, testing::oracle_run().manifold);
  return d;
}

}  // namespace

TEST_CASE("invariance residual matches the closed form") {
  const auto& o = testing::oracle_run();
  for (double th : {0.0, 0.3, 0.71}) {
    for (double sg : {-0.05, -0.01, 0.004, 0.03}) {
      const double E = invariance_residual(*o.model, o.manifold, th, sg);
      const double ref = oracle_residual(o.sign * sg, 5);
      CHECK(std::abs(E - ref) < 1e-12 + 1e-9 * ref);
    }
  }
  CHECK(invariance_residual_at(*o.model, o.manifold, 10, 0.02) ==
        doctest::Approx(oracle_residual(o.sign * 0.02, 5)).epsilon(1e-6));
}

TEST_CASE("accuracy domain boundaries") {
  const auto& o = testing::oracle_run();
  const auto& dom = oracle_domain();
  REQUIRE(dom.tolerances.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const double up = oracle_bound(dom.tolerances[k], o.sign, 5);
    const double down = oracle_bound(dom.tolerances[k], -o.sign, 5);
    CAPTURE(k);
    for (std::size_t g = 0; g < dom.theta.size(); g += 31) {
      CHECK(dom.upper[k][g] == doctest::Approx(up).epsilon(1e-6));
      CHECK(dom.lower[k][g] == doctest::Approx(down).epsilon(1e-6));
    }
    CHECK(dom.two_sided(k));
    CHECK(dom.min_extent(k) == doctest::Approx(up + down).epsilon(1e-6));
  }
  // the smaller tolerance gives the smaller domain
  CHECK(dom.upper[1][0] < dom.upper[0][0]);
  CHECK(dom.non_monotone.empty());

  AccuracySettings bad;
  bad.tolerances = {1e-8, 1e-6};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("truncation slope is L + 1") {
  const auto& o = testing::oracle_run();
  const auto& dom = oracle_domain();
  const auto sl = truncation_slopes(*o.model, o.manifold, dom, 0);
  // the oracle error behaves like c |sigma|^6 (1 + O(sigma)) near 0
  CHECK(sl.global_upper == doctest::Approx(6.0).epsilon(0.05));
  CHECK(sl.global_lower == doctest::Approx(6.0).epsilon(0.05));
  CHECK(sl.min > 5.7);
  CHECK(sl.max < 6.3);
  CHECK(sl.points.size() == 16);
}

TEST_CASE("orthogonality identities on the oracle") {
  const auto& o = testing::oracle_run();
  const auto rep = orthogonality_report(*o.model, o.manifold, o.response);
  REQUIRE(rep.rows.size() == 6);
  CHECK(rep.max_deviation < 1e-10);
  CHECK(rep.max_spectral_deviation < 1e-9);
  CHECK(rep.rows.back().z_sigma < 0.0);
  const auto tang = equation_tangents(*o.model, o.manifold);
  // K_n' = 2 pi c_n (-sin, cos)
  const double a1 = o.sign * 1.0;
  CHECK(std::abs(tang[1](1, 0) - two_pi * a1) < 1e-10);
}

TEST_CASE("seeded samples stay in the domain") {
  const auto& o = testing::oracle_run();
  const auto& dom = oracle_domain();
  SampleSettings ss;
  ss.count = 20;
  const auto a = sample_accuracy_domain(dom, 1, o.manifold.T, o.manifold.lambda_s, ss);
  const auto b = sample_accuracy_domain(dom, 1, o.manifold.T, o.manifold.lambda_s, ss);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].theta == b[i].theta);
    CHECK(a[i].sigma == b[i].sigma);
    CHECK(in_accuracy_domain(dom, 1, a[i].theta, a[i].sigma));
  }
  ss.seed = 1;
  const auto c = sample_accuracy_domain(dom, 1, o.manifold.T, o.manifold.lambda_s, ss);
  CHECK(c[0].sigma != a[0].sigma);
  CHECK_FALSE(in_accuracy_domain(dom, 1, 0.2, 10 * dom.upper[1][0]));
}

TEST_CASE("inversion, trajectories and directional derivatives") {
  const auto& o = testing::oracle_run();
  const auto& dom = oracle_domain();
  const auto x = evaluate_manifold(o.manifold, 0.42, 0.01);
  double th = 0.40, sg = 0.0;
  REQUIRE(invert_manifold(o.manifold, x, th, sg));
  CHECK(th == doctest::Approx(0.42).epsilon(1e-12));
  CHECK(sg == doctest::Approx(0.01).epsilon(1e-10));

  SampleSettings ss;
  ss.count = 10;
  const auto samples = sample_accuracy_domain(dom, 1, o.manifold.T, o.manifold.lambda_s, ss);
  const auto tr = trajectory_consistency(*o.model, o.manifold, samples);
  CHECK(tr.checks.size() == 10);
  CHECK(tr.inversion_failures == 0);
  // on the exact manifold the flow moves theta by t / T and sigma by e^{-2t}
  CHECK(tr.max_conjugacy < 1e-8);
  CHECK(tr.max_phase_drift < 1e-9);
  CHECK(tr.max_ratio_error < 1e-7);

  const auto dd = directional_derivatives(*o.model, o.manifold, o.response, samples);
  CHECK(dd.phase < 1e-8);
  CHECK(dd.amplitude < 1e-7);
}
