#pragma once

// Truncated sigma-jets of scalar functions sampled on the theta-grid. Products
// are pointwise on the grid and Cauchy convolutions in sigma.

#include <cstddef>
#include <span>
#include <vector>

#include "slowman/fourier.hpp"

namespace slowman {

class GridJet {
 public:
  GridJet() = default;
  GridJet(std::size_t order, std::size_t points);

  std::size_t order() const noexcept { return order_; }
  std::size_t points() const noexcept { return points_; }

  std::span<double> coeff(std::size_t n) { return {data_.data() + n * points_, points_}; }
  std::span<const double> coeff(std::size_t n) const { return {data_.data() + n * points_, points_}; }

  /// Same shape, order-0 coefficient equal to v everywhere.
  GridJet constant_like(double v) const;

  GridJet& operator+=(const GridJet& o);
  GridJet& operator-=(const GridJet& o);
  GridJet& operator*=(double s);
  GridJet& operator+=(double s);

  friend GridJet operator+(GridJet a, const GridJet& b) { return a += b; }
  friend GridJet operator-(GridJet a, const GridJet& b) { return a -= b; }
  friend GridJet operator-(GridJet a) { return a *= -1.0; }
  friend GridJet operator*(GridJet a, double s) { return a *= s; }
  friend GridJet operator*(double s, GridJet a) { return a *= s; }
  friend GridJet operator+(GridJet a, double s) { return a += s; }
  friend GridJet operator+(double s, GridJet a) { return a += s; }
  friend GridJet operator-(GridJet a, double s) { return a += -s; }
  friend GridJet operator-(double s, GridJet a) {
    a *= -1.0;
    return a += s;
  }
  /// Truncated Cauchy product.
  friend GridJet operator*(const GridJet& a, const GridJet& b);

 private:
  void check_shape(const GridJet& o) const;
  std::size_t order_ = 0;
  std::size_t points_ = 0;
  std::vector<double> data_;
};

GridJet pow(const GridJet& x, unsigned exponent);

/// Constant of the same kind as ref (plain value for doubles).
inline double constant_like(const double&, double v) { return v; }
inline GridJet constant_like(const GridJet& ref, double v) { return ref.constant_like(v); }

/// Synthesize orders 0..order of a Fourier-Taylor series into one jet per
/// component (real part). Orders above the series' order are zero.
std::vector<GridJet> to_jets(const FourierTaylor& series, std::size_t order);
/// Analyze jets back into a Fourier-Taylor series on a grid of the given period.
FourierTaylor from_jets(std::span<const GridJet> jets, int period = 1);

}  // namespace slowman
