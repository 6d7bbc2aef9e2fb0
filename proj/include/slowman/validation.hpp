#pragma once
// Accuracy checks for a computed expansion: the invariance error of the
// truncated parameterization, its domain of accuracy, the order-by-order
// orthogonality identities between K, Z and I, and checks against trajectories
// of the full system.

#include <cstdint>
#include <cstddef>
#include <vector>

#include "slowman/manifold.hpp"
#include "slowman/ode.hpp"
#include "slowman/response.hpp"

namespace slowman {

/// |sum_n [(1/T) K_n'(theta) + n ls K_n(theta)] sigma^n - X(sum_n K_n(theta) sigma^n)|_2
double invariance_residual(const VectorFieldModel& model, const ManifoldExpansion& m, double theta, double sigma);
/// Same on grid point g, with the grid values of K_n and K_n'.
double invariance_residual_at(const VectorFieldModel& model, const ManifoldExpansion& m, std::size_t g,
                              double sigma);

struct AccuracySettings {
  std::vector<double> tolerances{1e-6, 1e-8};
  /// |sigma| scanned on (0, window] with `scan` equal steps before bisection.
  /// With expand set, the window is doubled (up to max_window) until the
  /// residual at +-window exceeds the largest tolerance at every probed theta.
  double window = 1.0;
  bool expand = true;
  double max_window = 1e6;
  std::size_t scan = 64;
  std::size_t bisection_steps = 60;
  void validate() const;
};

struct AccuracyDomain {
  std::vector<double> tolerances;
  /// Scan window actually used (after expansion).
  double window = 0.0;
  std::vector<double> theta;
  /// [tolerance][grid point]: largest sigma >= 0 (upper) and largest |sigma|
  /// with sigma <= 0 (lower) such that the residual stays below tolerance.
  std::vector<std::vector<double>> upper;
  std::vector<std::vector<double>> lower;
  /// Grid points whose scan saw the residual drop back below tolerance
  /// past the first crossing (boundary only approximate).
  std::vector<std::size_t> non_monotone;
  /// Smallest two-sided extent min_theta(upper + lower) per tolerance.
  double min_extent(std::size_t tol_index) const;
  /// Every theta has a nonempty interval on both sides.
  bool two_sided(std::size_t tol_index) const;
};

AccuracyDomain accuracy_domain(const VectorFieldModel& model, const ManifoldExpansion& m,
                               const AccuracySettings& settings = {});

/// Least-squares slope of log E against log |sigma| on [sigma_hi / 2, sigma_hi]
/// (16 log-spaced points) at grid point g.
double truncation_slope(const VectorFieldModel& model, const ManifoldExpansion& m, std::size_t g, double sigma_hi);

struct SlopeReport {
  std::vector<std::size_t> points;
  std::vector<double> slopes;
  double min = 0.0, max = 0.0, median = 0.0;
  /// Slope of log max_theta E(theta, +-sigma) on [s/2, s], s the smallest
  /// bound of the domain on that side. Per-theta slopes wander where the
  /// leading coefficient of the error changes sign; these do not.
  double global_upper = 0.0, global_lower = 0.0;
};

/// Slopes at `count` equally spaced grid points, each fitted below the
/// boundary of the domain of accuracy for tolerance index tol_index, on the
/// side (upper or lower) with the larger extent.
SlopeReport truncation_slopes(const VectorFieldModel& model, const ManifoldExpansion& m, const AccuracyDomain& dom,
                              std::size_t tol_index, std::size_t count = 16);

/// Grid-max deviations of the identities obtained from
///   <grad Theta(K), d_theta K> = 1,  <grad Theta(K), d_sigma K> = 0,
///   <grad Sigma(K), d_theta K> = 0,  <grad Sigma(K), d_sigma K> = 1
/// at order sigma^n, n = 0..L. The d_sigma identities at order n involve
/// K_{n+1}, so they stop at n = L - 1 (entries for n = L are negative).
/// K_n' is taken pointwise from the invariance equation,
///   K_n' = T [DX(K_0) K_n + B_n - n ls K_n]   (K_0' = T X(K_0)),
/// and the *_spectral columns repeat the d_theta identities with spectral
/// derivatives of the grid data.
struct OrthogonalityRow {
  std::size_t n = 0;
  double z_theta = 0.0;
  double z_sigma = -1.0;
  double i_theta = 0.0;
  double i_sigma = -1.0;
  double z_theta_spectral = 0.0;
  double i_theta_spectral = 0.0;
};

struct OrthogonalityReport {
  std::vector<OrthogonalityRow> rows;
  /// over z_theta, z_sigma, i_theta, i_sigma
  double max_deviation = 0.0;
  double max_spectral_deviation = 0.0;
};

/// Tangent coefficients K_n' from the invariance equation, n = 0..order.
std::vector<RealGrid> equation_tangents(const VectorFieldModel& model, const ManifoldExpansion& m);

OrthogonalityReport orthogonality_report(const VectorFieldModel& model, const ManifoldExpansion& m,
                                         const ResponseExpansion& r);

struct ManifoldSample {
  double theta = 0.0;
  double sigma = 0.0;
};

struct SampleSettings {
  std::size_t count = 50;
  std::uint64_t seed = 0;
  /// Keep only starts whose predicted path (theta + t/T, sigma e^{ls t}),
  /// 0 <= t <= horizon_periods T, stays inside the domain. 0 disables.
  double horizon_periods = 2.0;
  std::size_t max_tries = 100000;
};

/// Seeded rejection sampling: grid theta uniform, sigma uniform on
/// [-lower, upper] at that theta for tolerance index tol_index.
std::vector<ManifoldSample> sample_accuracy_domain(const AccuracyDomain& dom, std::size_t tol_index, double T,
                                                   double lambda_s, const SampleSettings& settings = {});

/// Whether (theta, sigma) is inside the domain; bounds between grid points are
/// the smaller of the two neighbours.
bool in_accuracy_domain(const AccuracyDomain& dom, std::size_t tol_index, double theta, double sigma);

struct TrajectorySettings {
  /// Horizons t_k = k * max_periods * T / horizons, k = 1..horizons.
  std::size_t horizons = 8;
  double max_periods = 2.0;
  std::size_t newton_steps = 20;
  double newton_tol = 1e-14;
  /// Horizons where |sigma| e^{ls t} is below this are left out of
  /// max_decay_error: the relative error there only measures the inversion.
  double decay_floor = 1e-8;
  IntegratorSettings integrator{};
};

struct TrajectoryCheck {
  ManifoldSample start;
  std::vector<double> times;
  /// |phi_t(K(theta, sigma)) - K(theta + t/T, sigma e^{ls t})|
  std::vector<double> conjugacy;
  /// |Theta(phi_t) - theta - t/T| (mod 1) from inverting K
  std::vector<double> phase_drift;
  /// |Sigma(phi_t) / (sigma e^{ls t}) - 1|
  std::vector<double> decay_error;
  /// |Sigma(phi_t) / sigma - e^{ls t}|; stays meaningful once sigma e^{ls t}
  /// is down at the rounding level of the inversion
  std::vector<double> ratio_error;
  /// Horizons where the inversion did not converge.
  std::size_t inversion_failures = 0;
};

struct TrajectoryReport {
  std::vector<TrajectoryCheck> checks;
  double max_conjugacy = 0.0;
  double max_phase_drift = 0.0;
  double max_decay_error = 0.0;
  double max_ratio_error = 0.0;
  std::size_t inversion_failures = 0;
  /// horizons skipped by max_decay_error (below decay_floor)
  std::size_t unresolved_decay = 0;
};

/// Locally invert K: (theta, sigma) with K(theta, sigma) closest to x, by
/// Gauss-Newton from the seed. Returns false when it does not converge.
bool invert_manifold(const ManifoldExpansion& m, std::span<const double> x, double& theta, double& sigma,
                     std::size_t max_steps = 20, double tol = 1e-14);

TrajectoryReport trajectory_consistency(const VectorFieldModel& model, const ManifoldExpansion& m,
                                        const std::vector<ManifoldSample>& samples,
                                        const TrajectorySettings& settings = {});

/// max |<grad Theta, X> - 1/T| and max |<grad Sigma, X> - ls sigma| over the
/// samples, with the gradients from the truncated Z and I series.
struct DirectionalReport {
  double phase = 0.0;
  double amplitude = 0.0;
};

DirectionalReport directional_derivatives(const VectorFieldModel& model, const ManifoldExpansion& m,
                                          const ResponseExpansion& r, const std::vector<ManifoldSample>& samples);

}  // namespace slowman
