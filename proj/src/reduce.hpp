#pragma once
// Shared step of the K, Z and I recursions: project the inhomogeneity on the
// frame, solve the constant-coefficient system mode by mode, map back.

#include <cstddef>
#include <vector>

#include "slowman/frames.hpp"
#include "slowman/grid.hpp"

namespace slowman::detail {

enum class ReduceKind {
  // (1/T) K' + n ls K = DX K + rhs,        K = F u
  manifold,
  // (1/T) Z' = -(DX^T + n ls) Z - rhs,     Z = Q v
  phase,
  // (1/T) I' = -(DX^T + (n-1) ls) I - rhs, I = Q w; (k = 0, j = 0) free at n = 1
  amplitude,
};

struct ReduceResult {
  RealGrid solution;  // period 1, N points
  double min_divisor = 0.0;
  /// |rhs_0| of the free mode (amplitude, n = 1 only).
  double free_residual = 0.0;
  /// Largest imaginary part dropped when returning to real values.
  double imag_drift = 0.0;
  /// For period-2 frames: max |f(theta + 1) - f(theta)| of the mapped-back
  /// solution, which must be 1-periodic.
  double period_mismatch = 0.0;
};

ReduceResult reduce_solve(const Frame& bundle, const Frame& adjoint, const RealGrid& rhs, ReduceKind kind,
                          std::size_t n, double lambda_s, double small_divisor_tol);

}  // namespace slowman::detail
