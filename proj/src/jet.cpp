#include "slowman/jet.hpp"

#include <algorithm>

#include "slowman/kernels.hpp"

namespace slowman {

GridJet::GridJet(std::size_t order, std::size_t points)
    : order_(order), points_(points), data_((order + 1) * points, 0.0) {}

GridJet GridJet::constant_like(double v) const {
  GridJet out(order_, points_);
  std::fill_n(out.data_.begin(), points_, v);
  return out;
}

void GridJet::check_shape(const GridJet& o) const {
  if (order_ != o.order_ || points_ != o.points_) throw InvalidArgument("jet shapes differ");
}

GridJet& GridJet::operator+=(const GridJet& o) {
  check_shape(o);
  kernels::axpy(1.0, o.data_, data_);
  return *this;
}

GridJet& GridJet::operator-=(const GridJet& o) {
  check_shape(o);
  kernels::axpy(-1.0, o.data_, data_);
  return *this;
}

GridJet& GridJet::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

GridJet& GridJet::operator+=(double s) {
  for (std::size_t m = 0; m < points_; ++m) data_[m] += s;
  return *this;
}

GridJet operator*(const GridJet& a, const GridJet& b) {
  a.check_shape(b);
  GridJet out(a.order_, a.points_);
  for (std::size_t n = 0; n <= a.order_; ++n) {
    auto dst = out.coeff(n);
    for (std::size_t i = 0; i <= n; ++i) kernels::mul_acc(a.coeff(i), b.coeff(n - i), dst);
  }
  return out;
}

GridJet pow(const GridJet& x, unsigned exponent) {
  GridJet out = x.constant_like(1.0);
  GridJet base = x;
  while (exponent > 0) {
    if (exponent & 1U) out = out * base;
    exponent >>= 1U;
    if (exponent > 0) base = base * base;
  }
  return out;
}

std::vector<GridJet> to_jets(const FourierTaylor& series, std::size_t order) {
  if (series.empty()) throw InvalidArgument("Fourier-Taylor series has no order-0 coefficient");
  std::vector<GridJet> jets(series.arity(), GridJet(order, series.size()));
  for (std::size_t n = 0; n <= std::min(order, series.order()); ++n) {
    const RealGrid g = series[n].synthesize_real();
    for (std::size_t c = 0; c < series.arity(); ++c) {
      auto src = g.component(c);
      std::copy(src.begin(), src.end(), jets[c].coeff(n).begin());
    }
  }
  return jets;
}

FourierTaylor from_jets(std::span<const GridJet> jets, int period) {
  if (jets.empty()) throw InvalidArgument("from_jets: no components");
  const std::size_t order = jets.front().order();
  const std::size_t points = jets.front().points();
  FourierTaylor out;
  for (std::size_t n = 0; n <= order; ++n) {
    RealGrid g(jets.size(), points, period);
    for (std::size_t c = 0; c < jets.size(); ++c) {
      auto src = jets[c].coeff(n);
      std::copy(src.begin(), src.end(), g.component(c).begin());
    }
    if (n == 0) {
      out = FourierTaylor(FourierSeries::analyze(g));
    } else {
      out.push_back(FourierSeries::analyze(g));
    }
  }
  return out;
}

}  // namespace slowman
