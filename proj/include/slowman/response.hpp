#pragma once
// Power series in sigma of the phase and amplitude response functions on the
// slow submanifold: grad Theta(K(theta, sigma)) = sum Z_n sigma^n and
// grad Sigma_s(K(theta, sigma)) = sum I_n sigma^n.

#include <cstddef>
#include <string>
#include <vector>

#include "slowman/frames.hpp"
#include "slowman/manifold.hpp"

namespace slowman {

struct ResponseSettings {
  std::size_t order = 9;
  double small_divisor_tol = 1e-8;
  /// Bound on |h_0| of the free mode at n = 1.
  double solvability_tol = 1e-9;
};

struct AdjointOrderDiagnostics {
  std::size_t n = 0;
  double residual = 0.0;            // grid-max on |k| <= N/4, absolute
  double relative_residual = 0.0;   // divided by the largest term of the equation
  double full_band_residual = 0.0;  // relative, every mode kept
  double min_divisor = 0.0;
  double imag_drift = 0.0;
  double period_mismatch = 0.0;
  double norm = 0.0;
};

struct ResponseExpansion {
  double T = 0.0;
  double lambda_s = 0.0;
  std::vector<RealGrid> Z;
  std::vector<RealGrid> I;
  std::vector<AdjointOrderDiagnostics> z_orders;
  std::vector<AdjointOrderDiagnostics> i_orders;
  /// |h_0| of the free (k = 0, trivial direction) mode at n = 1.
  double solvability_residual = 0.0;
  /// c in I_1 = I_1^p + c Z_0.
  double free_coefficient = 0.0;
  /// grid-max |<I_0, K_1'>/T + <I_1, X(K_0)>| after fixing c, and the same
  /// identity in the form <I_0, DX K_1> + <I_1, X> - lambda_s.
  double normalization_residual = 0.0;
  double wilson_residual = 0.0;
  std::vector<TrigInterpolant> z_interp;
  std::vector<TrigInterpolant> i_interp;

  std::size_t order() const noexcept { return Z.empty() ? 0 : Z.size() - 1; }
  /// Rebuild the interpolants from Z and I.
  void finalize();
};

/// F_n, n = 0..order: sigma-coefficients of DX^T(K(theta, sigma)), arity d*d
/// (entry (i, j) of the matrix is component i * d + j).
std::vector<RealGrid> jacobian_transpose_coefficients(const VectorFieldModel& model, const ManifoldExpansion& m,
                                                      std::size_t order);

/// sum_{i<n} F_{n-i} W_i for W = Z (gives G_n) or W = I (gives H_n).
RealGrid response_inhomogeneity(const std::vector<RealGrid>& F, const std::vector<RealGrid>& W, std::size_t n);

/// Z_n for n >= 1.
RealGrid next_order_Zn(const std::vector<RealGrid>& F, const std::vector<RealGrid>& Z, const Frame& bundle,
                       const Frame& adjoint, double lambda_s, std::size_t n, double small_divisor_tol = 1e-8,
                       AdjointOrderDiagnostics* diagnostics = nullptr);

/// I_n for n >= 1. At n = 1 the returned value is the particular solution
/// with the free coefficient set to zero; free_residual receives |h_0|.
RealGrid next_order_In(const std::vector<RealGrid>& F, const std::vector<RealGrid>& I, const Frame& bundle,
                       const Frame& adjoint, double lambda_s, std::size_t n, double small_divisor_tol = 1e-8,
                       AdjointOrderDiagnostics* diagnostics = nullptr, double* free_residual = nullptr);

/// Residual of (1/T) W_n' + (F_0 + shift) W_n + sum_{i<n} F_{n-i} W_i,
/// scaled by the largest term.
SpectralResidual adjoint_homological_residual(const std::vector<RealGrid>& F, const std::vector<RealGrid>& W,
                                              std::size_t n, double T, double shift);

ResponseExpansion expand_response_functions(const VectorFieldModel& model, const ManifoldExpansion& manifold,
                                            const Frame& bundle, const Frame& adjoint,
                                            const FloquetSpectrum& spectrum, const ResponseSettings& settings = {});

/// sum_n Z_n(theta) sigma^n and sum_n I_n(theta) sigma^n at an arbitrary theta.
std::vector<double> evaluate_phase_response(const ResponseExpansion& r, double theta, double sigma);
std::vector<double> evaluate_amplitude_response(const ResponseExpansion& r, double theta, double sigma);

}  // namespace slowman
