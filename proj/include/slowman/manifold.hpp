#pragma once
// Fourier-Taylor parameterization K(theta, sigma) = sum_n K_n(theta) sigma^n of
// the slow attracting submanifold.

#include <cstddef>
#include <string>
#include <vector>

#include "slowman/cycle.hpp"
#include "slowman/fourier.hpp"
#include "slowman/frames.hpp"
#include "slowman/grid.hpp"
#include "slowman/jet.hpp"
#include "slowman/model.hpp"

namespace slowman {

struct ManifoldSettings {
  std::size_t order = 9;
  double small_divisor_tol = 1e-8;
  /// Imaginary drift above this is recorded as a warning.
  double imag_warn = 1e-10;
};

struct OrderDiagnostics {
  std::size_t n = 0;
  /// grid-max of the homological residual on |k| <= N/4, absolute and
  /// relative to the largest term of the equation; full_band_residual is the
  /// relative value with every mode kept
  double residual = 0.0;
  double relative_residual = 0.0;
  double full_band_residual = 0.0;
  double min_divisor = 0.0;
  double imag_drift = 0.0;
  double period_mismatch = 0.0;
  /// grid-max |coefficient|
  double norm = 0.0;
};

struct ManifoldExpansion {
  double T = 0.0;
  double lambda_s = 0.0;
  /// Scale of the slow bundle column (K_1 has grid-max norm |b|).
  double gauge = 1.0;
  Representation representation = Representation::complex;
  /// K_n and K_n' on the period-1 grid, n = 0..order.
  std::vector<RealGrid> K;
  std::vector<RealGrid> dK;
  std::vector<OrderDiagnostics> orders;
  std::vector<std::string> warnings;
  /// Off-grid evaluation of each K_n.
  std::vector<TrigInterpolant> interp;

  /// Recompute dK and interp from K (after loading K from disk).
  void finalize();

  std::size_t order() const noexcept { return K.empty() ? 0 : K.size() - 1; }
  std::size_t points() const noexcept { return K.empty() ? 0 : K.front().points(); }
  std::size_t dimension() const noexcept { return K.empty() ? 0 : K.front().arity(); }
  FourierTaylor series() const;
};

/// Sigma-jets (order `order`) of sum_n K_n sigma^n with K_n given for n < K.size().
std::vector<GridJet> jets_from_grids(const std::vector<RealGrid>& K, std::size_t order);

/// B_n: order-n coefficient of X(sum_{m<n} K_m sigma^m).
RealGrid manifold_inhomogeneity(const VectorFieldModel& model, const std::vector<RealGrid>& K, std::size_t n);

/// K_n from orders 0..n-1 (n >= 2) through the frame coordinates.
RealGrid next_order_Kn(const VectorFieldModel& model, const std::vector<RealGrid>& K, const Frame& bundle,
                       const Frame& adjoint, double lambda_s, std::size_t n, double small_divisor_tol = 1e-8,
                       OrderDiagnostics* diagnostics = nullptr);

/// Residual of (1/T) K_n' + n ls K_n - DX(K_0) K_n - B_n (n = 0: of the
/// cycle equation), scaled by the largest term.
SpectralResidual homological_residual(const VectorFieldModel& model, const std::vector<RealGrid>& K, std::size_t n,
                                      double T, double lambda_s);

/// Orders 0..settings.order. Requires a real_positive slow exponent.
ManifoldExpansion expand_slow_manifold(const VectorFieldModel& model, const Cycle& cycle,
                                       const FloquetSpectrum& spectrum, const Frame& bundle, const Frame& adjoint,
                                       const ManifoldSettings& settings = {});

/// Horner sum in sigma of trigonometric interpolants at theta.
std::vector<double> evaluate_manifold(const ManifoldExpansion& m, double theta, double sigma);

/// Value and partial derivatives (d/dtheta, d/dsigma) at an arbitrary point.
struct ManifoldPoint {
  std::vector<double> x, d_theta, d_sigma;
};
ManifoldPoint evaluate_manifold_jet(const ManifoldExpansion& m, double theta, double sigma);

/// Sum_n K_n(theta_g) sigma^n on grid point g (no interpolation).
std::vector<double> evaluate_manifold_at(const ManifoldExpansion& m, std::size_t g, double sigma);

}  // namespace slowman
