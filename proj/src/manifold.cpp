#include "slowman/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "reduce.hpp"
#include "slowman/fourier.hpp"

namespace slowman {

namespace {

double wrap(double theta) {
  const double t = theta - std::floor(theta);
  return t >= 1.0 ? 0.0 : t;
}

}  // namespace

void ManifoldExpansion::finalize() {
  dK.clear();
  interp.clear();
  for (const auto& k : K) {
    dK.push_back(spectral_derivative(k));
    interp.emplace_back(k);
  }
}

FourierTaylor ManifoldExpansion::series() const {
  FourierTaylor out;
  for (std::size_t n = 0; n < K.size(); ++n) {
    if (n == 0) {
      out = FourierTaylor(FourierSeries::analyze(K[0]));
    } else {
      out.push_back(FourierSeries::analyze(K[n]));
    }
  }
  return out;
}

std::vector<GridJet> jets_from_grids(const std::vector<RealGrid>& K, std::size_t order) {
  if (K.empty()) throw InvalidArgument("jets_from_grids: order-0 coefficient missing");
  const std::size_t d = K.front().arity();
  const std::size_t N = K.front().points();
  std::vector<GridJet> jets(d, GridJet(order, N));
  for (std::size_t n = 0; n < K.size() && n <= order; ++n) {
    if (!K[n].same_shape(K.front())) throw InvalidArgument("jets_from_grids: coefficients on different grids");
    for (std::size_t c = 0; c < d; ++c) {
      auto src = K[n].component(c);
      std::copy(src.begin(), src.end(), jets[c].coeff(n).begin());
    }
  }
  return jets;
}

RealGrid manifold_inhomogeneity(const VectorFieldModel& model, const std::vector<RealGrid>& K, std::size_t n) {
  if (K.size() < n) throw InvalidArgument("manifold_inhomogeneity needs orders 0..n-1");
  const std::vector<RealGrid> lower(K.begin(), K.begin() + static_cast<std::ptrdiff_t>(n));
  const auto jets = jets_from_grids(lower, n);
  const auto out = compose_field(model, jets);
  RealGrid B(model.dimension(), K.front().points());
  for (std::size_t c = 0; c < model.dimension(); ++c) {
    auto src = out[c].coeff(n);
    std::copy(src.begin(), src.end(), B.component(c).begin());
  }
  return B;
}

RealGrid next_order_Kn(const VectorFieldModel& model, const std::vector<RealGrid>& K, const Frame& bundle,
                       const Frame& adjoint, double lambda_s, std::size_t n, double small_divisor_tol,
                       OrderDiagnostics* diagnostics) {
  if (n < 2) throw InvalidArgument("next_order_Kn: n must be at least 2");
  const RealGrid B = manifold_inhomogeneity(model, K, n);
  const auto r = detail::reduce_solve(bundle, adjoint, B, detail::ReduceKind::manifold, n, lambda_s, small_divisor_tol);
  if (diagnostics) {
    diagnostics->n = n;
    diagnostics->min_divisor = r.min_divisor;
    diagnostics->imag_drift = r.imag_drift;
    diagnostics->period_mismatch = r.period_mismatch;
    diagnostics->norm = grid_max_norm(r.solution);
  }
  return r.solution;
}

SpectralResidual homological_residual(const VectorFieldModel& model, const std::vector<RealGrid>& K, std::size_t n,
                                      double T, double lambda_s) {
  if (n >= K.size()) throw InvalidArgument("homological_residual: order not available");
  const std::size_t d = model.dimension();
  const std::size_t N = K.front().points();
  const RealGrid dKn = spectral_derivative(K[n]);
  std::vector<double> x(d), f(d), J(d * d);
  RealGrid R(d, N);
  double scale = 0.0;
  if (n == 0) {
    for (std::size_t g = 0; g < N; ++g) {
      for (std::size_t c = 0; c < d; ++c) x[c] = K[0](c, g);
      model.eval(x, f);
      double s2a = 0.0, s2b = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double a = dKn(c, g) / T;
        R(c, g) = a - f[c];
        s2a += a * a;
        s2b += f[c] * f[c];
      }
      scale = std::max({scale, std::sqrt(s2a), std::sqrt(s2b)});
    }
    return measure_residual(R, scale);
  }
  const RealGrid B = manifold_inhomogeneity(model, K, n);
  const double nl = static_cast<double>(n) * lambda_s;
  for (std::size_t g = 0; g < N; ++g) {
    for (std::size_t c = 0; c < d; ++c) x[c] = K[0](c, g);
    model.jacobian(x, J);
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double dxk = 0.0;
      for (std::size_t j = 0; j < d; ++j) dxk += J[i * d + j] * K[n](j, g);
      const double a = dKn(i, g) / T;
      const double b = nl * K[n](i, g);
      R(i, g) = a + b - dxk - B(i, g);
      t1 += a * a;
      t2 += b * b;
      t3 += dxk * dxk;
      t4 += B(i, g) * B(i, g);
    }
    scale = std::max({scale, std::sqrt(t1), std::sqrt(t2), std::sqrt(t3), std::sqrt(t4)});
  }
  return measure_residual(R, scale);
}

ManifoldExpansion expand_slow_manifold(const VectorFieldModel& model, const Cycle& cycle,
                                       const FloquetSpectrum& spectrum, const Frame& bundle, const Frame& adjoint,
                                       const ManifoldSettings& settings) {
  if (settings.order < 1) throw InvalidArgument("manifold order must be at least 1");
  const std::size_t s = spectrum.slow_index;
  if (spectrum.classes.at(s) != FloquetClass::real_positive) {
    throw NumericalError("slow Floquet exponent is not real and positive-multiplier (class " +
                         class_name(spectrum.classes.at(s)) + ")");
  }
  const std::size_t N = cycle.samples.points();
  ManifoldExpansion m;
  m.T = cycle.T;
  m.lambda_s = spectrum.exponents[s].real();
  m.representation = bundle.representation;
  m.K.push_back(cycle.samples);
  {
    const ComplexGrid col = bundle.column(s);
    RealGrid K1(model.dimension(), N);
    for (std::size_t c = 0; c < K1.arity(); ++c) {
      for (std::size_t g = 0; g < N; ++g) K1(c, g) = col(c, g).real();
    }
    m.gauge = grid_max_norm(K1);
    m.K.push_back(std::move(K1));
  }
  for (std::size_t n = 0; n <= 1; ++n) {
    OrderDiagnostics od;
    od.n = n;
    od.norm = grid_max_norm(m.K[n]);
    m.orders.push_back(od);
  }
  for (std::size_t n = 2; n <= settings.order; ++n) {
    OrderDiagnostics od;
    m.K.push_back(next_order_Kn(model, m.K, bundle, adjoint, m.lambda_s, n, settings.small_divisor_tol, &od));
    if (od.imag_drift > settings.imag_warn * std::max(1.0, od.norm)) {
      m.warnings.push_back("K_" + std::to_string(n) + ": imaginary drift " + std::to_string(od.imag_drift));
    }
    m.orders.push_back(od);
  }
  for (std::size_t n = 0; n <= settings.order; ++n) {
    const SpectralResidual r = homological_residual(model, m.K, n, m.T, m.lambda_s);
    m.orders[n].residual = r.absolute;
    m.orders[n].relative_residual = r.relative;
    m.orders[n].full_band_residual = r.full_band;
  }
  m.finalize();
  return m;
}

std::vector<double> evaluate_manifold(const ManifoldExpansion& m, double theta, double sigma) {
  const std::size_t d = m.dimension();
  const double t = wrap(theta);
  std::vector<double> x(d, 0.0), v(d);
  for (std::size_t n = m.order() + 1; n-- > 0;) {
    m.interp[n].evaluate(t, v);
    for (std::size_t c = 0; c < d; ++c) x[c] = x[c] * sigma + v[c];
  }
  return x;
}

ManifoldPoint evaluate_manifold_jet(const ManifoldExpansion& m, double theta, double sigma) {
  const std::size_t d = m.dimension();
  const double t = wrap(theta);
  ManifoldPoint p{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::vector<double> v(d), dv(d);
  for (std::size_t n = m.order() + 1; n-- > 0;) {
    m.interp[n].evaluate(t, v, dv);
    for (std::size_t c = 0; c < d; ++c) {
      p.d_sigma[c] = p.d_sigma[c] * sigma + p.x[c];
      p.x[c] = p.x[c] * sigma + v[c];
      p.d_theta[c] = p.d_theta[c] * sigma + dv[c];
    }
  }
  return p;
}

std::vector<double> evaluate_manifold_at(const ManifoldExpansion& m, std::size_t g, double sigma) {
  const std::size_t d = m.dimension();
  std::vector<double> x(d, 0.0);
  for (std::size_t n = m.order() + 1; n-- > 0;) {
    for (std::size_t c = 0; c < d; ++c) x[c] = x[c] * sigma + m.K[n](c, g);
  }
  return x;
}

}  // namespace slowman
