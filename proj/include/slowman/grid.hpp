#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "slowman/errors.hpp"

namespace slowman {

using cplx = std::complex<double>;

/// Samples of a vector-valued periodic function on the uniform grid
/// theta_m = m * period / points, stored component-major.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t arity, std::size_t points, int period = 1)
      : arity_(arity), points_(points), period_(period), data_(arity * points, T{}) {
    if (period != 1 && period != 2) throw InvalidArgument("grid period must be 1 or 2");
  }

  std::size_t arity() const noexcept { return arity_; }
  std::size_t points() const noexcept { return points_; }
  int period() const noexcept { return period_; }
  double theta(std::size_t m) const noexcept {
    return static_cast<double>(m) * period_ / static_cast<double>(points_);
  }

  std::span<T> component(std::size_t c) { return {data_.data() + c * points_, points_}; }
  std::span<const T> component(std::size_t c) const { return {data_.data() + c * points_, points_}; }

  T& operator()(std::size_t c, std::size_t m) { return data_[c * points_ + m]; }
  const T& operator()(std::size_t c, std::size_t m) const { return data_[c * points_ + m]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  /// Values of every component at sample m.
  std::vector<T> at(std::size_t m) const {
    std::vector<T> v(arity_);
    for (std::size_t c = 0; c < arity_; ++c) v[c] = (*this)(c, m);
    return v;
  }

  bool same_shape(const Grid& o) const noexcept {
    return arity_ == o.arity_ && points_ == o.points_ && period_ == o.period_;
  }

 private:
  std::size_t arity_ = 0;
  std::size_t points_ = 0;
  int period_ = 1;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<cplx>;

/// Real part of a complex grid.
RealGrid real_part(const ComplexGrid& g);
/// Largest |imaginary part| of a complex grid.
double max_imag(const ComplexGrid& g);
/// Promote a real grid to complex.
ComplexGrid to_complex(const RealGrid& g);
/// Repeat a period-1 grid twice to obtain a period-2 grid on 2N points.
template <class T>
Grid<T> lift_to_period2(const Grid<T>& g);
/// Max over grid points of the Euclidean norm of the vector value.
double grid_max_norm(const RealGrid& g);
double grid_max_norm(const ComplexGrid& g);
/// Max over all entries of |value|.
double max_abs(const RealGrid& g);

}  // namespace slowman
