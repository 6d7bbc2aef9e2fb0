#include "slowman/validation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace slowman {

namespace {

double wrap_diff(double a) {
  // distance on the circle R/Z
  const double r = a - std::round(a);
  return std::abs(r);
}

double residual_norm(const VectorFieldModel& model, std::span<const double> x, std::span<const double> lhs) {
  const std::size_t d = x.size();
  std::vector<double> f(d);
  model.eval(x, f);
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) s += (lhs[c] - f[c]) * (lhs[c] - f[c]);
  return std::sqrt(s);
}

}  // namespace

double invariance_residual(const VectorFieldModel& model, const ManifoldExpansion& m, double theta, double sigma) {
  const std::size_t d = m.dimension();
  const double t = theta - std::floor(theta);
  std::vector<double> x(d, 0.0), lhs(d, 0.0), v(d), dv(d);
  for (std::size_t n = m.order() + 1; n-- > 0;) {
    m.interp[n].evaluate(t, v, dv);
    const double nl = static_cast<double>(n) * m.lambda_s;
    for (std::size_t c = 0; c < d; ++c) {
      x[c] = x[c] * sigma + v[c];
      lhs[c] = lhs[c] * sigma + dv[c] / m.T + nl * v[c];
    }
  }
  return residual_norm(model, x, lhs);
}

double invariance_residual_at(const VectorFieldModel& model, const ManifoldExpansion& m, std::size_t g,
                              double sigma) {
  const std::size_t d = m.dimension();
  std::vector<double> x(d, 0.0), lhs(d, 0.0);
  for (std::size_t n = m.order() + 1; n-- > 0;) {
    const double nl = static_cast<double>(n) * m.lambda_s;
    for (std::size_t c = 0; c < d; ++c) {
      x[c] = x[c] * sigma + m.K[n](c, g);
      lhs[c] = lhs[c] * sigma + m.dK[n](c, g) / m.T + nl * m.K[n](c, g);
    }
  }
  return residual_norm(model, x, lhs);
}

void AccuracySettings::validate() const {
  if (tolerances.empty()) throw InvalidArgument("accuracy domain needs at least one tolerance");
  for (double t : tolerances) {
    if (!(t > 0.0)) throw InvalidArgument("tolerances must be positive");
  }
  for (std::size_t k = 1; k < tolerances.size(); ++k) {
    if (!(tolerances[k] < tolerances[k - 1])) throw InvalidArgument("tolerances must be sorted in descending order");
  }
  if (!(window > 0.0) || scan < 1) throw InvalidArgument("sigma scan window must be positive with at least one step");
  if (expand && !(max_window >= window)) throw InvalidArgument("max_window must be at least the initial window");
}

double AccuracyDomain::min_extent(std::size_t k) const {
  double m = INFINITY;
  for (std::size_t g = 0; g < theta.size(); ++g) m = std::min(m, upper.at(k)[g] + lower.at(k)[g]);
  return m;
}

bool AccuracyDomain::two_sided(std::size_t k) const {
  for (std::size_t g = 0; g < theta.size(); ++g) {
    if (!(upper.at(k)[g] > 0.0) || !(lower.at(k)[g] > 0.0)) return false;
  }
  return !theta.empty();
}

AccuracyDomain accuracy_domain(const VectorFieldModel& model, const ManifoldExpansion& m,
                               const AccuracySettings& settings) {
  settings.validate();
  const std::size_t N = m.points();
  const std::size_t nt = settings.tolerances.size();
  AccuracyDomain dom;
  dom.tolerances = settings.tolerances;
  dom.theta.resize(N);
  dom.upper.assign(nt, std::vector<double>(N, 0.0));
  dom.lower.assign(nt, std::vector<double>(N, 0.0));
  double window = settings.window;
  if (settings.expand) {
    const double top = *std::max_element(settings.tolerances.begin(), settings.tolerances.end());
    const std::size_t stride = std::max<std::size_t>(1, N / 64);
    auto covered = [&](double w) {
      for (std::size_t g = 0; g < N; g += stride) {
        if (invariance_residual_at(model, m, g, w) < top || invariance_residual_at(model, m, g, -w) < top) return false;
      }
      return true;
    };
    while (!covered(window) && 2.0 * window <= settings.max_window) window *= 2.0;
  }
  dom.window = window;
  const double h = window / static_cast<double>(settings.scan);
  std::vector<double> scan(settings.scan + 1);
  for (std::size_t g = 0; g < N; ++g) {
    dom.theta[g] = static_cast<double>(g) / static_cast<double>(N);
    bool flagged = false;
    for (int side : {1, -1}) {
      auto f = [&](double s) { return invariance_residual_at(model, m, g, side * s); };
      for (std::size_t i = 0; i <= settings.scan; ++i) scan[i] = f(static_cast<double>(i) * h);
      for (std::size_t k = 0; k < nt; ++k) {
        const double tol = settings.tolerances[k];
        double bound = 0.0;
        if (scan[0] < tol) {
          std::size_t i = 1;
          while (i <= settings.scan && scan[i] < tol) ++i;
          if (i > settings.scan) {
            bound = window;
          } else {
            double lo = static_cast<double>(i - 1) * h, hi = static_cast<double>(i) * h;
            for (std::size_t b = 0; b < settings.bisection_steps && hi - lo > 1e-15 * hi; ++b) {
              const double mid = 0.5 * (lo + hi);
              (f(mid) < tol ? lo : hi) = mid;
            }
            bound = lo;
            for (std::size_t j = i + 1; j <= settings.scan; ++j) flagged |= scan[j] < tol;
          }
        }
        (side > 0 ? dom.upper : dom.lower)[k][g] = bound;
      }
    }
    if (flagged) dom.non_monotone.push_back(g);
  }
  return dom;
}

double truncation_slope(const VectorFieldModel& model, const ManifoldExpansion& m, std::size_t g, double sigma_hi) {
  constexpr int count = 16;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < count; ++i) {
    const double s = sigma_hi * std::pow(0.5, static_cast<double>(i) / (count - 1));
    const double x = std::log(std::abs(s));
    const double y = std::log(invariance_residual_at(model, m, g, s));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

SlopeReport truncation_slopes(const VectorFieldModel& model, const ManifoldExpansion& m, const AccuracyDomain& dom,
                              std::size_t tol_index, std::size_t count) {
  SlopeReport rep;
  const std::size_t N = m.points();
  count = std::clamp<std::size_t>(count, 1, N);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t g = i * N / count;
    const double up = dom.upper.at(tol_index)[g], lo = dom.lower.at(tol_index)[g];
    const double hi = up >= lo ? up : -lo;
    if (hi == 0.0) continue;
    rep.points.push_back(g);
    rep.slopes.push_back(truncation_slope(model, m, g, hi));
  }
  for (int side : {1, -1}) {
    const auto& b = side > 0 ? dom.upper.at(tol_index) : dom.lower.at(tol_index);
    const double smin = *std::min_element(b.begin(), b.end());
    if (smin == 0.0) continue;
    constexpr int K = 16;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < K; ++i) {
      const double sg = smin * std::pow(0.5, static_cast<double>(i) / (K - 1));
      double e = 0.0;
      for (std::size_t g = 0; g < N; ++g) e = std::max(e, invariance_residual_at(model, m, g, side * sg));
      const double x = std::log(sg), y = std::log(e);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    (side > 0 ? rep.global_upper : rep.global_lower) = (K * sxy - sx * sy) / (K * sxx - sx * sx);
  }
  if (!rep.slopes.empty()) {
    std::vector<double> s = rep.slopes;
    std::sort(s.begin(), s.end());
    rep.min = s.front();
    rep.max = s.back();
    rep.median = s[s.size() / 2];
  }
  return rep;
}

std::vector<RealGrid> equation_tangents(const VectorFieldModel& model, const ManifoldExpansion& m) {
  const std::size_t d = m.dimension();
  const std::size_t N = m.points();
  std::vector<RealGrid> out;
  std::vector<double> x(d), f(d), J(d * d);
  RealGrid t0(d, N);
  for (std::size_t g = 0; g < N; ++g) {
    for (std::size_t c = 0; c < d; ++c) x[c] = m.K[0](c, g);
    model.eval(x, f);
    for (std::size_t c = 0; c < d; ++c) t0(c, g) = m.T * f[c];
  }
  out.push_back(std::move(t0));
  for (std::size_t n = 1; n <= m.order(); ++n) {
    const RealGrid B = n >= 2 ? manifold_inhomogeneity(model, m.K, n) : RealGrid(d, N);
    const double nl = static_cast<double>(n) * m.lambda_s;
    RealGrid tn(d, N);
    for (std::size_t g = 0; g < N; ++g) {
      for (std::size_t c = 0; c < d; ++c) x[c] = m.K[0](c, g);
      model.jacobian(x, J);
      for (std::size_t i = 0; i < d; ++i) {
        double v = B(i, g) - nl * m.K[n](i, g);
        for (std::size_t j = 0; j < d; ++j) v += J[i * d + j] * m.K[n](j, g);
        tn(i, g) = m.T * v;
      }
    }
    out.push_back(std::move(tn));
  }
  return out;
}

OrthogonalityReport orthogonality_report(const VectorFieldModel& model, const ManifoldExpansion& m,
                                         const ResponseExpansion& r) {
  const std::size_t L = std::min(m.order(), r.order());
  const std::size_t d = m.dimension();
  const std::size_t N = m.points();
  if (r.Z.empty() || r.Z.front().points() != N) throw InvalidArgument("manifold and response grids differ");
  const auto tangent = equation_tangents(model, m);
  auto dot = [&](const RealGrid& a, const RealGrid& b, std::size_t g) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += a(c, g) * b(c, g);
    return s;
  };
  OrthogonalityReport rep;
  for (std::size_t n = 0; n <= L; ++n) {
    OrthogonalityRow row;
    row.n = n;
    const bool sigma_rows = n + 1 <= m.order();
    if (sigma_rows) row.z_sigma = row.i_sigma = 0.0;
    const double one = n == 0 ? 1.0 : 0.0;
    for (std::size_t g = 0; g < N; ++g) {
      double zt = -one, it = 0.0, zts = -one, its = 0.0, zs = 0.0, is = -one;
      for (std::size_t i = 0; i <= n; ++i) {
        zt += dot(r.Z[i], tangent[n - i], g);
        it += dot(r.I[i], tangent[n - i], g);
        zts += dot(r.Z[i], m.dK[n - i], g);
        its += dot(r.I[i], m.dK[n - i], g);
        if (sigma_rows) {
          const double w = static_cast<double>(n + 1 - i);
          zs += w * dot(r.Z[i], m.K[n + 1 - i], g);
          is += w * dot(r.I[i], m.K[n + 1 - i], g);
        }
      }
      row.z_theta = std::max(row.z_theta, std::abs(zt));
      row.i_theta = std::max(row.i_theta, std::abs(it));
      row.z_theta_spectral = std::max(row.z_theta_spectral, std::abs(zts));
      row.i_theta_spectral = std::max(row.i_theta_spectral, std::abs(its));
      if (sigma_rows) {
        row.z_sigma = std::max(row.z_sigma, std::abs(zs));
        row.i_sigma = std::max(row.i_sigma, std::abs(is));
      }
    }
    rep.max_deviation = std::max({rep.max_deviation, row.z_theta, row.i_theta, row.z_sigma, row.i_sigma});
    rep.max_spectral_deviation = std::max({rep.max_spectral_deviation, row.z_theta_spectral, row.i_theta_spectral});
    rep.rows.push_back(row);
  }
  return rep;
}

bool in_accuracy_domain(const AccuracyDomain& dom, std::size_t tol_index, double theta, double sigma) {
  const std::size_t N = dom.theta.size();
  if (N == 0) return false;
  const double t = (theta - std::floor(theta)) * static_cast<double>(N);
  const std::size_t g = static_cast<std::size_t>(t) % N;
  const std::size_t g2 = (g + 1) % N;
  const auto& b = sigma >= 0.0 ? dom.upper.at(tol_index) : dom.lower.at(tol_index);
  const double bound = t == std::floor(t) ? b[g] : std::min(b[g], b[g2]);
  return std::abs(sigma) <= bound;
}

std::vector<ManifoldSample> sample_accuracy_domain(const AccuracyDomain& dom, std::size_t tol_index, double T,
                                                   double lambda_s, const SampleSettings& settings) {
  const std::size_t N = dom.theta.size();
  if (N == 0) throw InvalidArgument("empty accuracy domain");
  const auto& up = dom.upper.at(tol_index);
  const auto& lo = dom.lower.at(tol_index);
  std::mt19937_64 rng(settings.seed);
  std::uniform_int_distribution<std::size_t> pick(0, N - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // path checked on a step of T / 256
  const std::size_t steps = static_cast<std::size_t>(std::ceil(settings.horizon_periods * 256.0));
  std::vector<ManifoldSample> out;
  std::size_t tries = 0;
  while (out.size() < settings.count) {
    if (++tries > settings.max_tries) {
      throw NumericalError("could not draw " + std::to_string(settings.count) + " samples inside the domain of accuracy");
    }
    const std::size_t g = pick(rng);
    const double sigma = -lo[g] + unit(rng) * (up[g] + lo[g]);
    bool ok = true;
    for (std::size_t k = 1; k <= steps && ok; ++k) {
      const double t = static_cast<double>(k) * settings.horizon_periods * T / static_cast<double>(steps);
      ok = in_accuracy_domain(dom, tol_index, dom.theta[g] + t / T, sigma * std::exp(lambda_s * t));
    }
    if (ok) out.push_back({dom.theta[g], sigma});
  }
  return out;
}

bool invert_manifold(const ManifoldExpansion& m, std::span<const double> x, double& theta, double& sigma,
                     std::size_t max_steps, double tol) {
  const auto d = static_cast<Eigen::Index>(m.dimension());
  double last = INFINITY;
  for (std::size_t it = 0; it < max_steps; ++it) {
    const ManifoldPoint p = evaluate_manifold_jet(m, theta, sigma);
    Eigen::VectorXd r(d);
    Eigen::MatrixXd J(d, 2);
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto i = static_cast<std::size_t>(c);
      r(c) = p.x[i] - x[i];
      J(c, 0) = p.d_theta[i];
      J(c, 1) = p.d_sigma[i];
    }
    const Eigen::Vector2d step = J.colPivHouseholderQr().solve(r);
    if (!step.allFinite()) return false;
    theta -= step(0);
    sigma -= step(1);
    last = std::abs(step(0)) + std::abs(step(1));
    if (last <= tol * (1.0 + std::abs(sigma))) return true;
  }
  // stagnation at rounding level still counts as converged
  return last <= 1e-10 * (1.0 + std::abs(sigma));
}

TrajectoryReport trajectory_consistency(const VectorFieldModel& model, const ManifoldExpansion& m,
                                        const std::vector<ManifoldSample>& samples,
                                        const TrajectorySettings& settings) {
  if (settings.horizons < 1 || !(settings.max_periods > 0.0)) throw InvalidArgument("trajectory horizons must be positive");
  const std::size_t d = m.dimension();
  std::vector<double> times(settings.horizons);
  for (std::size_t k = 0; k < settings.horizons; ++k) {
    times[k] = static_cast<double>(k + 1) * settings.max_periods * m.T / static_cast<double>(settings.horizons);
  }
  TrajectoryReport rep;
  for (const auto& s : samples) {
    TrajectoryCheck chk;
    chk.start = s;
    chk.times = times;
    const auto x0 = evaluate_manifold(m, s.theta, s.sigma);
    const auto xs = flow_samples(model, x0, times, settings.integrator);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double th = s.theta + times[k] / m.T;
      const double sg = s.sigma * std::exp(m.lambda_s * times[k]);
      const auto pred = evaluate_manifold(m, th, sg);
      double e = 0.0;
      for (std::size_t c = 0; c < d; ++c) e += (xs[k][c] - pred[c]) * (xs[k][c] - pred[c]);
      chk.conjugacy.push_back(std::sqrt(e));
      double ti = th, si = sg;
      if (invert_manifold(m, xs[k], ti, si, settings.newton_steps, settings.newton_tol)) {
        chk.phase_drift.push_back(wrap_diff(ti - th));
        chk.decay_error.push_back(sg != 0.0 ? std::abs(si / sg - 1.0) : std::abs(si));
        chk.ratio_error.push_back(s.sigma != 0.0 ? std::abs(si / s.sigma - sg / s.sigma) : std::abs(si));
      } else {
        ++chk.inversion_failures;
        chk.phase_drift.push_back(NAN);
        chk.decay_error.push_back(NAN);
        chk.ratio_error.push_back(NAN);
      }
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      rep.max_conjugacy = std::max(rep.max_conjugacy, chk.conjugacy[k]);
      if (std::isfinite(chk.phase_drift[k])) {
        rep.max_phase_drift = std::max(rep.max_phase_drift, chk.phase_drift[k]);
        const double predicted = std::abs(s.sigma) * std::exp(m.lambda_s * times[k]);
        if (predicted >= settings.decay_floor) {
          rep.max_decay_error = std::max(rep.max_decay_error, chk.decay_error[k]);
        } else {
          ++rep.unresolved_decay;
        }
        rep.max_ratio_error = std::max(rep.max_ratio_error, chk.ratio_error[k]);
      }
    }
    rep.inversion_failures += chk.inversion_failures;
    rep.checks.push_back(std::move(chk));
  }
  return rep;
}

DirectionalReport directional_derivatives(const VectorFieldModel& model, const ManifoldExpansion& m,
                                          const ResponseExpansion& r, const std::vector<ManifoldSample>& samples) {
  const std::size_t d = m.dimension();
  DirectionalReport rep;
  std::vector<double> f(d);
  for (const auto& s : samples) {
    const auto x = evaluate_manifold(m, s.theta, s.sigma);
    model.eval(x, f);
    const auto z = evaluate_phase_response(r, s.theta, s.sigma);
    const auto i = evaluate_amplitude_response(r, s.theta, s.sigma);
    const double zp = std::inner_product(z.begin(), z.end(), f.begin(), 0.0);
    const double ip = std::inner_product(i.begin(), i.end(), f.begin(), 0.0);
    rep.phase = std::max(rep.phase, std::abs(zp - 1.0 / m.T));
    rep.amplitude = std::max(rep.amplitude, std::abs(ip - m.lambda_s * s.sigma));
  }
  return rep;
}

}  // namespace slowman
