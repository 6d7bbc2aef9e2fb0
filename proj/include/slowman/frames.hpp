#pragma once
// Floquet normal-form frames along the cycle: the bundle frame whose columns
// are K_0' and the order-1 bundles, and the adjoint frame Q = frame^{-T}
// whose columns are the iPRC and the iARCs.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slowman/cycle.hpp"
#include "slowman/grid.hpp"
#include "slowman/model.hpp"
#include "slowman/ode.hpp"

namespace slowman {

enum class Representation { complex, real };
enum class FrameKind { bundle, adjoint };

std::string representation_name(Representation r);
Representation parse_representation(const std::string& s);

/// d x d matrix of periodic functions sampled on the theta-grid. Values are
/// stored complex in both representations (the real one has zero imaginary
/// parts up to rounding).
struct Frame {
  FrameKind kind = FrameKind::bundle;
  Representation representation = Representation::complex;
  double T = 0.0;
  int period = 1;
  std::vector<FloquetClass> classes;
  /// Constant generator: (1/T) F' = DX F - F L for the bundle frame,
  /// (1/T) Q' = -DX^T Q + Q L^T for the adjoint one. Diagonal in the complex
  /// representation; 2x2 blocks [[a, b], [-b, a]] for complex pairs in the
  /// real one (real_negative entries carry nu_j there).
  Eigen::MatrixXcd generator;
  /// values[m] is the frame matrix at theta_m = m * period / points.
  std::vector<Eigen::MatrixXcd> values;

  std::size_t dimension() const noexcept { return classes.size(); }
  std::size_t points() const noexcept { return values.size(); }
  double theta(std::size_t m) const noexcept {
    return static_cast<double>(m) * period / static_cast<double>(values.size());
  }
  ComplexGrid column(std::size_t j) const;
  RealGrid real_column(std::size_t j) const;
};

/// Bundle frame from the Floquet data. scale holds b_j for j = 1..d-1 (empty
/// means all ones); column j >= 1 is b_j K_{e_j} / max_theta |K_{e_j}|.
/// In the real representation real_negative columns are the 2-periodic
/// e^{i pi theta} K_{e_j}, complex pairs become (Re K_{e_j}, Im K_{e_j}), and
/// the whole frame is lifted to period 2 when any real_negative column exists.
Frame build_bundle_frame(const VectorFieldModel& model, const Cycle& cycle, const FloquetSpectrum& spectrum,
                         Representation representation, std::span<const double> scale = {});

/// K_0'(theta) = T X(gamma(theta)) on the cycle grid.
RealGrid tangent_column(const VectorFieldModel& model, const Cycle& cycle);

/// Q(theta) = frame(theta)^{-T} by pointwise LU solves. Throws when a frame
/// matrix is singular (condition number above max_condition).
Frame build_adjoint_frame(const Frame& bundle, double max_condition = 1e12);

/// DX(K_0) on the frame's grid (lifted when the frame has period 2).
std::vector<Eigen::MatrixXd> jacobians_on_grid(const VectorFieldModel& model, const RealGrid& cycle_samples,
                                               int period);

struct FrameReport {
  /// Spectral residual of the frame ODE, grid-max per column, relative to the
  /// column's grid-max norm (columns carry an arbitrary scale) and absolute.
  std::vector<double> ode_residual;
  std::vector<double> ode_residual_abs;
  double max_ode_residual = 0.0;
  /// Largest pointwise condition number of the frame matrix.
  double max_condition = 0.0;
};

FrameReport frame_report(const VectorFieldModel& model, const RealGrid& cycle_samples, const Frame& frame);

/// max_m |Q(theta_m)^T F(theta_m) - Id|.
double biorthogonality_error(const Frame& bundle, const Frame& adjoint);

/// max_m |<Q_0(theta_m), X(gamma(theta_m))> - 1/T|.
double phase_normalization_error(const VectorFieldModel& model, const RealGrid& cycle_samples,
                                 const Frame& adjoint);

/// max over theta in [0, 1) of |f(theta + 1) + f(theta)| for a period-2 column.
double antiperiodicity_error(const Frame& frame, std::size_t column);

/// For real_negative directions, max |K_{e_j}(theta) - e^{-i pi theta} Kr_{e_j}(theta)|
/// between a complex and a real bundle frame built with the same scales.
double negative_bundle_relation_error(const Frame& complex_bundle, const Frame& real_bundle, std::size_t column);

struct AdjointCrossCheck {
  /// Eigenvalues of Psi_T matched to e^{-conj(lambda_j) T}.
  std::vector<cplx> psi_multipliers;
  std::vector<cplx> expected_multipliers;
  double max_multiplier_error = 0.0;  // relative
  /// Per-column grid-max discrepancy between the Psi-based column and Q's.
  std::vector<double> column_error;
  std::vector<double> column_relative_error;
  double max_column_error = 0.0;
};

/// Rebuilds every column of a complex adjoint frame from the adjoint
/// fundamental solution e^{lambda_j t} Psi(t) w_j, gauged by <., K_{e_j}> = 1.
AdjointCrossCheck cross_check_adjoint_frame(const VectorFieldModel& model, const Cycle& cycle,
                                            const FloquetSpectrum& spectrum, const Frame& bundle,
                                            const Frame& adjoint, std::size_t segments = 64,
                                            const IntegratorSettings& integrator = {});

}  // namespace slowman
