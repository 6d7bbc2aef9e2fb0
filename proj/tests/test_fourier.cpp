#include <doctest.h>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "slowman/fourier.hpp"

using namespace slowman;
using testing::two_pi;

namespace {

// direct O(n^2) DFT with the 1/n normalization of fft_forward
std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx s = 0.0;
    for (std::size_t m = 0; m < n; ++m) s += x[m] * std::polar(1.0, -two_pi * double(k * m % n) / double(n));
    out[k] = s / double(n);
  }
  return out;
}

RealGrid sample(std::size_t N, int period, auto f) {
  RealGrid g(1, N, period);
  for (std::size_t m = 0; m < N; ++m) g(0, m) = f(g.theta(m));
  return g;
}

}  // namespace

TEST_CASE("power of two") {
  CHECK_FALSE(is_power_of_two(1));
  CHECK(is_power_of_two(2));
  CHECK(is_power_of_two(4096));
  CHECK_FALSE(is_power_of_two(0));
  CHECK_FALSE(is_power_of_two(96));
}

TEST_CASE("fft matches the direct transform") {
  for (std::size_t n : {2u, 8u, 64u, 256u}) {
    const auto re = testing::random_vector(n, 7 + n), im = testing::random_vector(n, 11 + n);
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
    const auto ref = naive_dft(x);
    auto y = x;
    fft_forward(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - ref[i]) < 1e-14);
    fft_inverse(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-14);
  }
}

TEST_CASE("coefficients of a known trigonometric polynomial") {
  const auto g = sample(64, 1, [](double t) { return 3.0 + 2.0 * std::cos(two_pi * 3 * t) + std::sin(two_pi * 5 * t); });
  const auto s = FourierSeries::analyze(g);
  CHECK(std::abs(s.coeff(0, 0) - cplx(3.0)) < 1e-14);
  CHECK(std::abs(s.coeff(0, 3) - cplx(1.0)) < 1e-14);
  CHECK(std::abs(s.coeff(0, -3) - cplx(1.0)) < 1e-14);
  CHECK(std::abs(s.coeff(0, 5) - cplx(0.0, -0.5)) < 1e-14);
  CHECK(std::abs(s.coeff(0, -5) - cplx(0.0, 0.5)) < 1e-14);
  CHECK(s.is_conjugate_symmetric(1e-14));
  for (double t : {0.013, 0.37, 0.999}) {
    const double exact = 3.0 + 2.0 * std::cos(two_pi * 3 * t) + std::sin(two_pi * 5 * t);
    CHECK(std::abs(s.evaluate(0, t) - exact) < 1e-13);
  }
  CHECK(FourierSeries::wavenumber(FourierSeries::index(-7, 64), 64) == -7);
  const auto back = s.synthesize_real();
  CHECK(testing::grid_max_diff(back, g) < 1e-14);
}

TEST_CASE("spectral derivative on period 1 and period 2") {
  const auto g = sample(128, 1, [](double t) { return std::sin(two_pi * 4 * t); });
  const auto d = spectral_derivative(g);
  for (std::size_t m = 0; m < 128; ++m) CHECK(std::abs(d(0, m) - two_pi * 4 * std::cos(two_pi * 4 * g.theta(m))) < 1e-11);

  // cos(pi theta) has period 2
  const auto h = sample(128, 2, [](double t) { return std::cos(0.5 * two_pi * t); });
  const auto dh = spectral_derivative(h);
  for (std::size_t m = 0; m < 128; ++m) CHECK(std::abs(dh(0, m) + 0.5 * two_pi * std::sin(0.5 * two_pi * h.theta(m))) < 1e-12);
}

TEST_CASE("diagonal solve recovers a chosen solution") {
  // u = cos(2 pi 2 t) + 0.5 sin(2 pi 7 t); rhs = (1/T) u' + c u
  const double T = 3.5, c = 0.8;
  auto u = [](double t) { return std::cos(two_pi * 2 * t) + 0.5 * std::sin(two_pi * 7 * t); };
  auto du = [](double t) { return -two_pi * 2 * std::sin(two_pi * 2 * t) + 0.5 * two_pi * 7 * std::cos(two_pi * 7 * t); };
  const auto rhs = sample(64, 1, [&](double t) { return du(t) / T + c * u(t); });
  const cplx shift[] = {c};
  const auto res = solve_diagonal(FourierSeries::analyze(rhs), T, shift);
  const auto sol = res.solution.synthesize_real();
  CHECK(testing::grid_max_diff(sol, sample(64, 1, u)) < 1e-14);
  // smallest |2 pi i k / T + c| is at k = 0
  CHECK(res.min_divisor == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("zero divisor throws unless the mode is free") {
  const auto rhs = sample(32, 1, [](double t) { return 1.0 + std::cos(two_pi * t); });
  const cplx shift[] = {0.0};
  CHECK_THROWS_AS(solve_diagonal(FourierSeries::analyze(rhs), 1.0, shift), SmallDivisorError);
  DiagonalSolveOptions opt;
  opt.free_modes = {{0, 0}};
  const auto res = solve_diagonal(FourierSeries::analyze(rhs), 1.0, shift, opt);
  REQUIRE(res.free_residuals.size() == 1);
  CHECK(res.free_residuals[0] == doctest::Approx(1.0));
  // u' = cos(2 pi t) gives sin(2 pi t) / (2 pi)
  const auto sol = res.solution.synthesize_real();
  for (std::size_t m = 0; m < 32; ++m) CHECK(std::abs(sol(0, m) - std::sin(two_pi * sol.theta(m)) / two_pi) < 1e-15);
}

TEST_CASE("2x2 block solve recovers a chosen pair") {
  const double T = 2.0, alpha = -0.3, beta = 0.7, s = 0.1;
  auto ua = [](double t) { return std::sin(two_pi * t) + 0.2; };
  auto ub = [](double t) { return std::cos(two_pi * 3 * t); };
  auto dua = [](double t) { return two_pi * std::cos(two_pi * t); };
  auto dub = [](double t) { return -two_pi * 3 * std::sin(two_pi * 3 * t); };
  const auto ra = sample(64, 1, [&](double t) { return dua(t) / T + (alpha + s) * ua(t) - beta * ub(t); });
  const auto rb = sample(64, 1, [&](double t) { return dub(t) / T + beta * ua(t) + (alpha + s) * ub(t); });
  const auto res = block_solve_2x2(FourierSeries::analyze(ra), FourierSeries::analyze(rb), T, alpha, beta, s);
  CHECK(testing::grid_max_diff(res.first.synthesize_real(), sample(64, 1, ua)) < 1e-14);
  CHECK(testing::grid_max_diff(res.second.synthesize_real(), sample(64, 1, ub)) < 1e-14);
}

TEST_CASE("trigonometric interpolant and its derivative") {
  auto f = [](double t) { return std::exp(std::sin(two_pi * t)); };
  auto df = [](double t) { return two_pi * std::cos(two_pi * t) * std::exp(std::sin(two_pi * t)); };
  const TrigInterpolant ip(sample(64, 1, f));
  double v[1], d[1];
  for (double t : {0.0, 0.123, 0.5, 0.777, 1.3}) {
    ip.evaluate(t, v, d);
    CHECK(std::abs(v[0] - f(t)) < 1e-14);
    CHECK(std::abs(d[0] - df(t)) < 1e-12);
  }
}

TEST_CASE("low pass and banded residual") {
  auto g = sample(64, 1, [](double t) { return std::cos(two_pi * 3 * t) + 1e-6 * std::cos(two_pi * 30 * t); });
  const auto lp = low_pass(g, 16);
  for (std::size_t m = 0; m < 64; ++m) CHECK(std::abs(lp(0, m) - std::cos(two_pi * 3 * lp.theta(m))) < 1e-14);
  const auto r = measure_residual(g, 2.0);
  CHECK(r.absolute == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.relative == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.full_band == doctest::Approx((1.0 + 1e-6) / 2.0).epsilon(1e-9));
}

TEST_CASE("fourier-taylor truncation") {
  FourierTaylor ft(FourierSeries(2, 16));
  ft.push_back(FourierSeries(2, 16));
  ft.push_back(FourierSeries(2, 16));
  CHECK(ft.order() == 2);
  CHECK(ft.truncated(1).order() == 1);
  CHECK_THROWS(ft.push_back(FourierSeries(3, 16)));
}
