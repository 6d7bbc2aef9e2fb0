#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "slowman/fourier.hpp"
#include "slowman/model.hpp"
#include "slowman/ode.hpp"

namespace slowman {

struct CycleSettings {
  /// Empty means a model default (see default_guess).
  std::vector<double> guess;
  double relax_time = 500.0;
  double newton_tol = 1e-12;
  std::size_t max_newton = 40;
  /// Grid size N (power of two).
  std::size_t grid_N = 4096;
  /// The phase origin is placed at the maximum of this component; -1 keeps
  /// the Newton anchor.
  int phase_component = 0;
  /// Section degenerate below this |X(x*)|.
  double min_speed = 1e-8;
  void validate(std::size_t dim) const;
};

std::vector<double> default_guess(const VectorFieldModel& model);

struct Cycle {
  std::vector<double> anchor;
  double T = 0.0;
  /// gamma(m / N), m = 0..N-1.
  RealGrid samples;
  /// |phi_T(x*) - x*| after the final resampling.
  double closure_residual = 0.0;
  std::size_t newton_iterations = 0;
};

Cycle find_cycle(const VectorFieldModel& model, const CycleSettings& settings,
                 const IntegratorSettings& integrator = {});
/// Resample a known cycle (anchor, T) on N points without any search.
Cycle sample_cycle(const VectorFieldModel& model, std::span<const double> anchor, double T, std::size_t N,
                   const IntegratorSettings& integrator = {});

/// Variational data along the cycle split into m equal segments starting at
/// grid nodes: local[g] = Phi(t_g, t_i) with t_i the segment start of grid
/// point g, propagators[i] = Phi(t_{i+1}, t_i).
struct SegmentedVariational {
  std::size_t segments = 0;
  std::vector<Eigen::MatrixXd> local;
  std::vector<Eigen::MatrixXd> propagators;
  double trace_integral = 0.0;
  Eigen::MatrixXd monodromy() const;
  /// log|det Phi_T| and its sign, accumulated segment by segment.
  double log_abs_det = 0.0;
  int det_sign = 1;
};

SegmentedVariational segmented_variational(const VectorFieldModel& model, const Cycle& cycle, std::size_t segments,
                                           const IntegratorSettings& integrator = {});

/// Eigen-data of a product of segment propagators P_{m-1}...P_0 (period T)
/// from the block-cyclic matrix: principal-branch exponents and the node
/// values v_i of each eigenvector, with P_i v_i = e^{lambda T / m} v_{i+1}.
struct CyclicEigen {
  std::vector<cplx> exponents;                 // principal branch, Im in (-pi/T, pi/T]
  std::vector<Eigen::MatrixXcd> node_vectors;  // d x m per exponent
};
CyclicEigen cyclic_eigen(const std::vector<Eigen::MatrixXd>& propagators, double T);

enum class FloquetClass { trivial, real_positive, real_negative, complex_pair_lead, complex_pair_conjugate };
std::string class_name(FloquetClass c);

struct FloquetSpectrum {
  double T = 0.0;
  std::vector<cplx> multipliers;
  std::vector<cplx> exponents;
  std::vector<double> lyapunov;
  std::vector<Eigen::VectorXcd> eigenvectors;
  std::vector<FloquetClass> classes;
  std::size_t slow_index = 1;
  /// K_{e_j}(theta_g) = e^{-lambda_j T theta} Phi(T theta) w_j on the cycle grid
  /// (complex, 1-periodic; unit-norm eigenvector gauge).
  std::vector<ComplexGrid> bundles;
  double eigenvector_condition = 0.0;
  /// int_0^T trace DX(gamma) dt and log|det Phi_T|.
  double trace_integral = 0.0;
  double log_abs_det = 0.0;
  std::size_t segments = 0;

  std::size_t dimension() const noexcept { return multipliers.size(); }
};

struct FloquetSettings {
  /// Multiple-shooting segments (must divide N).
  std::size_t segments = 64;
  /// Relative tolerance for treating a multiplier as real.
  double real_tol = 1e-8;
  double max_condition = 1e10;
};

FloquetSpectrum floquet_spectrum(const VectorFieldModel& model, const Cycle& cycle,
                                 const FloquetSettings& settings = {}, const IntegratorSettings& integrator = {});

struct ResonanceEntry {
  std::vector<int> multi_index;  // over directions 1..d-1
  std::size_t target = 0;
  double residual = 0.0;
};

/// Minima over k in [-N/2, N/2) and j of the recursion divisors.
struct DivisorTable {
  std::vector<double> manifold;   // |2 pi i k / T + n lambda_s - lambda_j|, entry n - 2 for n = 2..L
  std::vector<double> phase;      // |2 pi i k / T + lambda_j + n lambda_s|, entry n - 1 for n = 1..L
  std::vector<double> amplitude;  // |2 pi i k / T + lambda_j + (n - 1) lambda_s|, entry n - 1, free mode excluded
};

struct ResonanceReport {
  std::size_t max_order = 0;
  double tol = 0.0;
  std::vector<ResonanceEntry> entries;
  std::vector<ResonanceEntry> flagged;
  double min_residual = 0.0;
  DivisorTable divisors;
  bool divisor_flag = false;
};

/// Resonances sum_i a_i lambda_i = lambda_k (mod 2 pi i / T)
/// for 2 <= |a| <= L_max, plus the small-divisor tables of the slow recursions.
ResonanceReport check_resonances(const FloquetSpectrum& spectrum, std::size_t max_order, double tol = 1e-8,
                                 std::size_t grid_N = 4096);

}  // namespace slowman
