#pragma once
// Small helpers shared by the unit tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "slowman/grid.hpp"

namespace testing {

inline constexpr double two_pi = 6.283185307179586476925286766559;

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// coefficients of (1 - 2 s)^p up to s^n
inline std::vector<double> binomial_series(double p, std::size_t n) {
  std::vector<double> c(n + 1);
  c[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    // c_k = c_{k-1} * (p - k + 1) / k * (-2)
    c[k] = c[k - 1] * (p - static_cast<double>(k) + 1.0) / static_cast<double>(k) * -2.0;
  }
  return c;
}

inline double grid_max_diff(const slowman::RealGrid& a, const slowman::RealGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace testing
