#pragma once

// Trigonometric polynomials on a period-1 or period-2 circle, their sigma-jets,
// spectral differentiation, and the constant-coefficient Fourier-space solvers
// used by every recursion step.

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "slowman/grid.hpp"

namespace slowman {

/// n = 2^k with k >= 1.
bool is_power_of_two(std::size_t n) noexcept;

/// In-place complex DFT of length n (power of two). Forward applies the 1/n
/// normalization, inverse does not.
void fft_forward(std::span<cplx> data);
void fft_inverse(std::span<cplx> data);

/// Vector-valued trigonometric polynomial
///   u(theta) = sum_k c_k exp(2 pi i k theta / P),  k = -M/2 .. M/2-1,
/// with M = size() samples on [0, P). Coefficients are kept in FFT order.
class FourierSeries {
 public:
  FourierSeries() = default;
  FourierSeries(std::size_t arity, std::size_t size, int period = 1);

  static FourierSeries analyze(const RealGrid& grid);
  static FourierSeries analyze(const ComplexGrid& grid);
  ComplexGrid synthesize() const;
  /// Synthesis keeping the real part only.
  RealGrid synthesize_real() const;

  std::size_t arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return size_; }
  int period() const noexcept { return period_; }

  static std::size_t index(long k, std::size_t size) noexcept;
  static long wavenumber(std::size_t index, std::size_t size) noexcept;

  cplx coeff(std::size_t c, long k) const { return coeffs_[c * size_ + index(k, size_)]; }
  cplx& coeff(std::size_t c, long k) { return coeffs_[c * size_ + index(k, size_)]; }
  std::span<cplx> component(std::size_t c) { return {coeffs_.data() + c * size_, size_}; }
  std::span<const cplx> component(std::size_t c) const { return {coeffs_.data() + c * size_, size_}; }

  /// Trigonometric interpolation at an arbitrary theta.
  cplx evaluate(std::size_t c, double theta) const;
  std::vector<cplx> evaluate(double theta) const;

  /// c_{-k} = conj(c_k) for every component, within tol (Nyquist must be real).
  bool is_conjugate_symmetric(double tol) const;
  double max_abs_coeff() const;

 private:
  std::size_t arity_ = 0;
  std::size_t size_ = 0;
  int period_ = 1;
  std::vector<cplx> coeffs_;
};

/// Fast evaluation of real sampled data between grid points: modes below
/// floor * (largest coefficient) are dropped and the rest summed with a
/// z^k recurrence. Also returns d/dtheta.
class TrigInterpolant {
 public:
  TrigInterpolant() = default;
  explicit TrigInterpolant(const RealGrid& samples, double floor = 1e-15);
  std::size_t arity() const noexcept { return arity_; }
  std::size_t bandwidth() const noexcept { return kmax_; }
  int period() const noexcept { return period_; }
  void evaluate(double theta, std::span<double> value) const;
  void evaluate(double theta, std::span<double> value, std::span<double> derivative) const;

 private:
  void powers(double theta, std::vector<cplx>& zk) const;
  std::size_t arity_ = 0;
  std::size_t kmax_ = 0;
  int period_ = 1;
  // coeffs_[c * (kmax_ + 1) + k], k = 0..kmax_
  std::vector<cplx> coeffs_;
};

/// c_k -> (2 pi i k / P) c_k; the Nyquist mode k = -M/2 is zeroed.
FourierSeries differentiate(const FourierSeries& series);

/// Spectral derivative of sampled data (analyze, differentiate, synthesize).
RealGrid spectral_derivative(const RealGrid& grid);
ComplexGrid spectral_derivative(const ComplexGrid& grid);

/// Zero every mode with |k| > kmax.
RealGrid low_pass(const RealGrid& grid, std::size_t kmax);

/// Grid-max of an equation residual r. Modes past a quarter of the grid only
/// carry rounding noise (amplified by the spectral derivative), so the
/// reported value is taken on |k| <= M/4; full_band keeps every mode.
/// relative and full_band are divided by scale.
struct SpectralResidual {
  double absolute = 0.0;
  double relative = 0.0;
  double full_band = 0.0;
};
SpectralResidual measure_residual(const RealGrid& r, double scale);

struct DiagonalSolveOptions {
  double small_divisor_tol = 1e-8;
  /// Recursion order, used only to label errors.
  int order = -1;
  /// (k, component) pairs whose divisor is allowed to vanish; their
  /// coefficient is set to zero and |rhs coefficient| is reported.
  std::vector<std::pair<long, std::size_t>> free_modes;
};

struct DiagonalSolveResult {
  FourierSeries solution;
  double min_divisor = 0.0;
  std::vector<double> free_residuals;
};

/// Unique periodic solution of (1/T) u' = -diag(shift) u + rhs, solved mode by
/// mode: u_k = rhs_k / (2 pi i k / (P T) + shift_j). The Nyquist mode of the
/// solution is set to zero. Throws SmallDivisorError below the tolerance.
DiagonalSolveResult solve_diagonal(const FourierSeries& rhs, double period_T,
                                   std::span<const cplx> shift,
                                   const DiagonalSolveOptions& options = {});

struct BlockSolveResult {
  FourierSeries first;
  FourierSeries second;
  double min_divisor = 0.0;
};

/// Per-mode 2x2 solve coupling a pair of scalar series (a, b):
///   [ xi + alpha + shift   -beta            ] [u_a]   [r_a]
///   [ beta                 xi + alpha + shift] [u_b] = [r_b],  xi = 2 pi i k / (P T).
/// det = (xi + alpha + shift + i beta)(xi + alpha + shift - i beta); the
/// smaller factor is checked against the tolerance.
BlockSolveResult block_solve_2x2(const FourierSeries& rhs_a, const FourierSeries& rhs_b,
                                 double period_T, double alpha, double beta, cplx shift,
                                 double small_divisor_tol = 1e-8, int order = -1);

/// Truncated power series in sigma whose coefficients share one grid.
class FourierTaylor {
 public:
  FourierTaylor() = default;
  explicit FourierTaylor(FourierSeries order0);

  std::size_t order() const noexcept { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
  bool empty() const noexcept { return coeffs_.empty(); }
  std::size_t arity() const noexcept { return coeffs_.front().arity(); }
  std::size_t size() const noexcept { return coeffs_.front().size(); }
  int period() const noexcept { return coeffs_.front().period(); }

  void push_back(FourierSeries coeff);
  const FourierSeries& operator[](std::size_t n) const { return coeffs_.at(n); }
  FourierSeries& operator[](std::size_t n) { return coeffs_.at(n); }
  /// Copy truncated to orders 0..n.
  FourierTaylor truncated(std::size_t n) const;

 private:
  std::vector<FourierSeries> coeffs_;
};

}  // namespace slowman
