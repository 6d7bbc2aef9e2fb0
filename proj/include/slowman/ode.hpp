#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "slowman/fourier.hpp"
#include "slowman/model.hpp"

namespace slowman {

struct IntegratorSettings {
  double rtol = 1e-12;
  double atol = 1e-13;
  std::size_t max_steps = 2'000'000;
  bool dense_output = false;
  void validate() const;
};

/// phi_t(x0). Negative t integrates backwards; t = 0 returns x0 unchanged.
std::vector<double> flow(const VectorFieldModel& model, std::span<const double> x0, double t,
                         const IntegratorSettings& settings = {});

/// States along one trajectory at the given nondecreasing times (>= 0).
/// The integrator lands exactly on every requested time.
std::vector<std::vector<double>> flow_samples(const VectorFieldModel& model, std::span<const double> x0,
                                              std::span<const double> times,
                                              const IntegratorSettings& settings = {});

struct VariationalState {
  std::vector<double> state;
  Eigen::MatrixXd phi;
  /// int_0^t trace DX(phi_s(x0)) ds, integrated alongside.
  double trace_integral = 0.0;
};

VariationalState flow_with_variational(const VectorFieldModel& model, std::span<const double> x0, double t,
                                       const IntegratorSettings& settings = {});
std::vector<VariationalState> flow_with_variational_samples(const VectorFieldModel& model,
                                                            std::span<const double> x0,
                                                            std::span<const double> times,
                                                            const IntegratorSettings& settings = {});

/// gamma(t) = K_0(t / T) by trigonometric interpolation of period-1 samples.
/// Modes below 1e-15 of the largest coefficient (FFT noise) are dropped.
class CycleInterpolant {
 public:
  CycleInterpolant(const RealGrid& samples, double period_T);
  std::size_t dimension() const noexcept { return dim_; }
  double period() const noexcept { return T_; }
  /// Largest admissible time (one period).
  double span() const noexcept { return T_; }
  void evaluate(double t, std::span<double> out) const;
  std::vector<double> evaluate(double t) const;
  std::size_t bandwidth() const noexcept { return trig_.bandwidth(); }

 private:
  std::size_t dim_ = 0;
  double T_ = 0.0;
  TrigInterpolant trig_;
};

/// Psi(t1, t0): fundamental solution of y' = -DX^T(gamma(s)) y from t0 to t1
/// with Psi(t0, t0) = Id. 0 <= t0 <= t1 <= span.
Eigen::MatrixXd adjoint_flow(const VectorFieldModel& model, const CycleInterpolant& cycle, double t1,
                             const IntegratorSettings& settings = {}, double t0 = 0.0);
/// Psi(t_k, t0) at every requested time (t_k >= t0).
std::vector<Eigen::MatrixXd> adjoint_flow_samples(const VectorFieldModel& model, const CycleInterpolant& cycle,
                                                  std::span<const double> times,
                                                  const IntegratorSettings& settings = {}, double t0 = 0.0);

/// Phi(t_k, 0) of the linear system y' = DX(gamma(s)) y with the same
/// interpolated coefficients as adjoint_flow.
std::vector<Eigen::MatrixXd> linearized_flow_samples(const VectorFieldModel& model, const CycleInterpolant& cycle,
                                                     std::span<const double> times,
                                                     const IntegratorSettings& settings = {}, double t0 = 0.0);

enum class Precision { working, extended };

struct DualityReport {
  Precision precision = Precision::working;
  std::vector<double> times;
  /// max_ab |(Psi(t)^T Phi(t) - Id)_ab| at each time
  std::vector<double> deviation;
  std::size_t steps = 0;
};

/// Integrates x' = X(x), Phi' = DX(x) Phi, Psi' = -DX(x)^T Psi jointly from x0
/// (one error control for all three) and measures how far Psi^T Phi is from
/// the identity. Along an attracting cycle |Psi| grows like the inverse of the
/// strongest contraction, so the working-precision result is limited by
/// rounding for long horizons; the extended variant runs the same scheme in a
/// wider type.
DualityReport fundamental_duality(const VectorFieldModel& model, std::span<const double> x0,
                                  std::span<const double> times, const IntegratorSettings& settings,
                                  Precision precision);

}  // namespace slowman
