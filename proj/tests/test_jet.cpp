#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "slowman/jet.hpp"

using namespace slowman;

namespace {

GridJet random_jet(std::size_t order, std::size_t points, std::uint64_t seed) {
  GridJet j(order, points);
  for (std::size_t n = 0; n <= order; ++n) {
    const auto v = testing::random_vector(points, seed + n);
    std::copy(v.begin(), v.end(), j.coeff(n).begin());
  }
  return j;
}

}  // namespace

TEST_CASE("cauchy product against explicit convolution") {
  const std::size_t L = 6, P = 9;
  const auto a = random_jet(L, P, 1), b = random_jet(L, P, 100);
  const auto c = a * b;
  for (std::size_t n = 0; n <= L; ++n) {
    for (std::size_t m = 0; m < P; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i <= n; ++i) s += a.coeff(i)[m] * b.coeff(n - i)[m];
      CHECK(c.coeff(n)[m] == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("powers and scalar arithmetic") {
  // x = 1 + sigma at every point: x^3 = 1 + 3 s + 3 s^2 + s^3
  GridJet x(4, 3);
  for (std::size_t m = 0; m < 3; ++m) {
    x.coeff(0)[m] = 1.0;
    x.coeff(1)[m] = 1.0;
  }
  const auto p = pow(x, 3);
  const double expect[] = {1, 3, 3, 1, 0};
  for (std::size_t n = 0; n <= 4; ++n) CHECK(p.coeff(n)[1] == expect[n]);
  const auto q = 2.0 - x * 3.0 + 1.0;
  CHECK(q.coeff(0)[0] == 0.0);
  CHECK(q.coeff(1)[0] == -3.0);
  CHECK(pow(x, 0).coeff(0)[2] == 1.0);
  CHECK_THROWS_AS(x + GridJet(3, 3), InvalidArgument);
}

TEST_CASE("jets round trip through a fourier-taylor series") {
  const std::size_t N = 16;
  std::vector<GridJet> jets{random_jet(3, N, 5), random_jet(3, N, 50)};
  const auto ft = from_jets(jets);
  CHECK(ft.order() == 3);
  CHECK(ft.arity() == 2);
  const auto back = to_jets(ft, 3);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t n = 0; n <= 3; ++n) {
      for (std::size_t m = 0; m < N; ++m) CHECK(std::abs(back[c].coeff(n)[m] - jets[c].coeff(n)[m]) < 1e-14);
    }
  }
  // orders above the series are zero
  const auto wide = to_jets(ft, 5);
  CHECK(wide[0].coeff(5)[3] == 0.0);
}
