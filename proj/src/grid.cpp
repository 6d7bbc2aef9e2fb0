#include "slowman/grid.hpp"

#include <algorithm>
#include <cmath>

namespace slowman {

RealGrid real_part(const ComplexGrid& g) {
  RealGrid out(g.arity(), g.points(), g.period());
  std::transform(g.data().begin(), g.data().end(), out.data().begin(),
                 [](const cplx& z) { return z.real(); });
  return out;
}

double max_imag(const ComplexGrid& g) {
  double m = 0.0;
  for (const cplx& z : g.data()) m = std::max(m, std::abs(z.imag()));
  return m;
}

ComplexGrid to_complex(const RealGrid& g) {
  ComplexGrid out(g.arity(), g.points(), g.period());
  std::copy(g.data().begin(), g.data().end(), out.data().begin());
  return out;
}

template <class T>
Grid<T> lift_to_period2(const Grid<T>& g) {
  if (g.period() != 1) throw InvalidArgument("lift_to_period2 expects a period-1 grid");
  Grid<T> out(g.arity(), 2 * g.points(), 2);
  for (std::size_t c = 0; c < g.arity(); ++c) {
    auto src = g.component(c);
    auto dst = out.component(c);
    std::copy(src.begin(), src.end(), dst.begin());
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(g.points()));
  }
  return out;
}

template RealGrid lift_to_period2(const RealGrid&);
template ComplexGrid lift_to_period2(const ComplexGrid&);

namespace {
template <class T>
double max_norm_impl(const Grid<T>& g) {
  double m = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < g.arity(); ++c) s += std::norm(g(c, p));
    m = std::max(m, std::sqrt(s));
  }
  return m;
}
}  // namespace

double grid_max_norm(const RealGrid& g) { return max_norm_impl(g); }
double grid_max_norm(const ComplexGrid& g) { return max_norm_impl(g); }

double max_abs(const RealGrid& g) {
  double m = 0.0;
  for (double v : g.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace slowman
