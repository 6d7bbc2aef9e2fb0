#include "slowman/response.hpp"

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

RealGrid first_period_column(const Frame& f, std::size_t j, std::size_t N) {
  const ComplexGrid col = f.column(j);
  RealGrid out(col.arity(), N);
  for (std::size_t c = 0; c < col.arity(); ++c) {
    for (std::size_t g = 0; g < N; ++g) out(c, g) = col(c, g).real();
  }
  return out;
}

std::vector<double> horner(const std::vector<TrigInterpolant>& terms, double theta, double sigma) {
  const std::size_t d = terms.front().arity();
  const double t = wrap(theta);
  std::vector<double> x(d, 0.0), v(d);
  for (std::size_t n = terms.size(); n-- > 0;) {
    terms[n].evaluate(t, v);
    for (std::size_t c = 0; c < d; ++c) x[c] = x[c] * sigma + v[c];
  }
  return x;
}

void fill_diagnostics(AdjointOrderDiagnostics* diag, std::size_t n, const detail::ReduceResult& r) {
  if (!diag) return;
  diag->n = n;
  diag->min_divisor = r.min_divisor;
  diag->imag_drift = r.imag_drift;
  diag->period_mismatch = r.period_mismatch;
  diag->norm = grid_max_norm(r.solution);
}

}  // namespace

void ResponseExpansion::finalize() {
  z_interp.clear();
  i_interp.clear();
  for (const auto& z : Z) z_interp.emplace_back(z);
  for (const auto& i : I) i_interp.emplace_back(i);
}

std::vector<RealGrid> jacobian_transpose_coefficients(const VectorFieldModel& model, const ManifoldExpansion& m,
                                                      std::size_t order) {
  const std::size_t d = model.dimension();
  const std::size_t N = m.points();
  const auto jets = jets_from_grids(m.K, order);
  const auto out = compose_jacobian_transpose(model, jets);
  std::vector<RealGrid> F;
  for (std::size_t n = 0; n <= order; ++n) {
    RealGrid g(d * d, N);
    for (std::size_t e = 0; e < d * d; ++e) {
      auto src = out[e].coeff(n);
      std::copy(src.begin(), src.end(), g.component(e).begin());
    }
    F.push_back(std::move(g));
  }
  return F;
}

RealGrid response_inhomogeneity(const std::vector<RealGrid>& F, const std::vector<RealGrid>& W, std::size_t n) {
  if (W.size() < n || F.size() <= n) throw InvalidArgument("response_inhomogeneity: orders missing");
  const std::size_t d = W.front().arity();
  const std::size_t N = W.front().points();
  RealGrid out(d, N);
  for (std::size_t i = 0; i < n; ++i) {
    const RealGrid& Fm = F[n - i];
    const RealGrid& Wi = W[i];
    for (std::size_t r = 0; r < d; ++r) {
      auto dst = out.component(r);
      for (std::size_t c = 0; c < d; ++c) {
        auto f = Fm.component(r * d + c);
        auto w = Wi.component(c);
        for (std::size_t g = 0; g < N; ++g) dst[g] += f[g] * w[g];
      }
    }
  }
  return out;
}

RealGrid next_order_Zn(const std::vector<RealGrid>& F, const std::vector<RealGrid>& Z, const Frame& bundle,
                       const Frame& adjoint, double lambda_s, std::size_t n, double small_divisor_tol,
                       AdjointOrderDiagnostics* diagnostics) {
  if (n < 1) throw InvalidArgument("next_order_Zn: n must be at least 1");
  const RealGrid G = response_inhomogeneity(F, Z, n);
  const auto r = detail::reduce_solve(bundle, adjoint, G, detail::ReduceKind::phase, n, lambda_s, small_divisor_tol);
  fill_diagnostics(diagnostics, n, r);
  return r.solution;
}

RealGrid next_order_In(const std::vector<RealGrid>& F, const std::vector<RealGrid>& I, const Frame& bundle,
                       const Frame& adjoint, double lambda_s, std::size_t n, double small_divisor_tol,
                       AdjointOrderDiagnostics* diagnostics, double* free_residual) {
  if (n < 1) throw InvalidArgument("next_order_In: n must be at least 1");
  const RealGrid H = response_inhomogeneity(F, I, n);
  const auto r =
      detail::reduce_solve(bundle, adjoint, H, detail::ReduceKind::amplitude, n, lambda_s, small_divisor_tol);
  fill_diagnostics(diagnostics, n, r);
  if (free_residual) *free_residual = r.free_residual;
  return r.solution;
}

SpectralResidual adjoint_homological_residual(const std::vector<RealGrid>& F, const std::vector<RealGrid>& W,
                                              std::size_t n, double T, double shift) {
  if (n >= W.size()) throw InvalidArgument("adjoint_homological_residual: order not available");
  const std::size_t d = W.front().arity();
  const std::size_t N = W.front().points();
  const RealGrid dW = spectral_derivative(W[n]);
  const RealGrid G = n == 0 ? RealGrid(d, N) : response_inhomogeneity(F, W, n);
  RealGrid R(d, N);
  double scale = 0.0;
  for (std::size_t g = 0; g < N; ++g) {
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double fw = 0.0;
      for (std::size_t j = 0; j < d; ++j) fw += F[0](i * d + j, g) * W[n](j, g);
      const double a = dW(i, g) / T;
      const double b = shift * W[n](i, g);
      R(i, g) = a + fw + b + G(i, g);
      t1 += a * a;
      t2 += fw * fw;
      t3 += b * b;
      t4 += G(i, g) * G(i, g);
    }
    scale = std::max({scale, std::sqrt(t1), std::sqrt(t2), std::sqrt(t3), std::sqrt(t4)});
  }
  return measure_residual(R, scale);
}

ResponseExpansion expand_response_functions(const VectorFieldModel& model, const ManifoldExpansion& manifold,
                                            const Frame& bundle, const Frame& adjoint,
                                            const FloquetSpectrum& spectrum, const ResponseSettings& settings) {
  const std::size_t L = settings.order;
  if (manifold.order() < L) {
    throw InvalidArgument("response order " + std::to_string(L) + " needs the manifold to order " +
                          std::to_string(L) + " (have " + std::to_string(manifold.order()) + ")");
  }
  if (L >= 1 && manifold.order() < 1) throw InvalidArgument("response needs K_1");
  const std::size_t d = model.dimension();
  const std::size_t N = manifold.points();
  const std::size_t s = spectrum.slow_index;
  const double T = manifold.T;
  const double ls = manifold.lambda_s;

  ResponseExpansion out;
  out.T = T;
  out.lambda_s = ls;
  const auto F = jacobian_transpose_coefficients(model, manifold, std::max<std::size_t>(L, 1));
  out.Z.push_back(first_period_column(adjoint, 0, N));
  out.I.push_back(first_period_column(adjoint, s, N));

  for (std::size_t n = 1; n <= L; ++n) {
    AdjointOrderDiagnostics zd;
    out.Z.push_back(next_order_Zn(F, out.Z, bundle, adjoint, ls, n, settings.small_divisor_tol, &zd));
    out.z_orders.push_back(zd);

    AdjointOrderDiagnostics id;
    double h0 = 0.0;
    RealGrid In = next_order_In(F, out.I, bundle, adjoint, ls, n, settings.small_divisor_tol, &id, &h0);
    if (n == 1) {
      out.solvability_residual = h0;
      if (!(h0 <= settings.solvability_tol)) {
        throw NumericalError("order-1 amplitude equation not solvable: |h_0| = " + std::to_string(h0) +
                             " exceeds " + std::to_string(settings.solvability_tol));
      }
      // I_1 = I_1^p + c Z_0 with the grid mean of <I_0, K_1'>/T + <I_1, X(K_0)> set to zero
      std::vector<double> x(d), f(d);
      double mean = 0.0;
      std::vector<double> base(N), zx(N);
      for (std::size_t g = 0; g < N; ++g) {
        for (std::size_t c = 0; c < d; ++c) x[c] = manifold.K[0](c, g);
        model.eval(x, f);
        double a = 0.0, b = 0.0, z = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          a += out.I[0](c, g) * manifold.dK[1](c, g);
          b += In(c, g) * f[c];
          z += out.Z[0](c, g) * f[c];
        }
        base[g] = a / T + b;
        zx[g] = z;
        mean += base[g];
      }
      mean /= static_cast<double>(N);
      out.free_coefficient = -T * mean;
      for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t g = 0; g < N; ++g) In(c, g) += out.free_coefficient * out.Z[0](c, g);
      }
      id.norm = grid_max_norm(In);
      std::vector<double> J(d * d);
      for (std::size_t g = 0; g < N; ++g) {
        out.normalization_residual =
            std::max(out.normalization_residual, std::abs(base[g] + out.free_coefficient * zx[g]));
        for (std::size_t c = 0; c < d; ++c) x[c] = manifold.K[0](c, g);
        model.eval(x, f);
        model.jacobian(x, J);
        double w = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          double dk = 0.0;
          for (std::size_t j = 0; j < d; ++j) dk += J[i * d + j] * manifold.K[1](j, g);
          w += out.I[0](i, g) * dk + In(i, g) * f[i];
        }
        out.wilson_residual = std::max(out.wilson_residual, std::abs(w - ls));
      }
    }
    out.I.push_back(std::move(In));
    out.i_orders.push_back(id);
  }
  for (std::size_t n = 1; n <= L; ++n) {
    const auto zr = adjoint_homological_residual(F, out.Z, n, T, static_cast<double>(n) * ls);
    out.z_orders[n - 1].residual = zr.absolute;
    out.z_orders[n - 1].relative_residual = zr.relative;
    out.z_orders[n - 1].full_band_residual = zr.full_band;
    const auto ir = adjoint_homological_residual(F, out.I, n, T, static_cast<double>(n - 1) * ls);
    out.i_orders[n - 1].residual = ir.absolute;
    out.i_orders[n - 1].relative_residual = ir.relative;
    out.i_orders[n - 1].full_band_residual = ir.full_band;
  }
  out.finalize();
  return out;
}

std::vector<double> evaluate_phase_response(const ResponseExpansion& r, double theta, double sigma) {
  return horner(r.z_interp, theta, sigma);
}

std::vector<double> evaluate_amplitude_response(const ResponseExpansion& r, double theta, double sigma) {
  return horner(r.i_interp, theta, sigma);
}

}  // namespace slowman
