#include "slowman/cycle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

namespace slowman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// First return to the hyperplane through x0 normal to X(x0), crossing in the
// direction of the flow and close to x0 relative to the excursion so far.
double estimate_period(const VectorFieldModel& model, const std::vector<double>& x0, double max_time,
                       const IntegratorSettings& integ) {
  const std::vector<double> f0 = model.eval(x0);
  const double speed = norm2(f0);
  std::vector<double> n(f0.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = f0[i] / speed;
  auto g = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += n[i] * (x[i] - x0[i]);
    return s;
  };
  auto dist = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x0[i]) * (x[i] - x0[i]);
    return std::sqrt(s);
  };

  const double dt = 0.01;
  const std::size_t chunk = 200;
  std::vector<double> x = x0;
  double t = 0.0;
  double g_prev = 0.0;
  double excursion = 0.0;
  IntegratorSettings loose = integ;
  loose.rtol = std::max(integ.rtol, 1e-10);
  loose.atol = std::max(integ.atol, 1e-12);
  while (t < max_time) {
    std::vector<double> times(chunk);
    for (std::size_t k = 0; k < chunk; ++k) times[k] = dt * static_cast<double>(k + 1);
    const auto traj = flow_samples(model, x, times, loose);
    for (std::size_t k = 0; k < chunk; ++k) {
      const double gk = g(traj[k]);
      const double dk = dist(traj[k]);
      const double tk = t + times[k];
      if (g_prev < 0.0 && gk >= 0.0 && dk < 0.25 * excursion) {
        return tk - dt * gk / (gk - g_prev);
      }
      excursion = std::max(excursion, dk);
      g_prev = gk;
    }
    x = traj.back();
    t += times.back();
  }
  throw NumericalError("no return to the Poincare section within " + std::to_string(max_time) +
                       " time units (is the guess in the basin of a limit cycle?)");
}

std::vector<double> column_at(const RealGrid& g, std::size_t m) { return g.at(m); }

// Phase (in [0,1)) of the maximum of one component of the sampled cycle.
double phase_of_maximum(const RealGrid& samples, std::size_t component) {
  auto comp = samples.component(component);
  const auto it = std::max_element(comp.begin(), comp.end());
  const std::size_t N = samples.points();
  double theta = static_cast<double>(it - comp.begin()) / static_cast<double>(N);
  RealGrid one(1, N);
  std::copy(comp.begin(), comp.end(), one.component(0).begin());
  const FourierSeries s = FourierSeries::analyze(one);
  const FourierSeries d1 = differentiate(s);
  const FourierSeries d2 = differentiate(d1);
  for (int iter = 0; iter < 20; ++iter) {
    const double f1 = d1.evaluate(0, theta).real();
    const double f2 = d2.evaluate(0, theta).real();
    if (f2 >= 0.0) break;  // not at a maximum; keep the grid estimate
    const double step = f1 / f2;
    theta -= step;
    if (std::abs(step) < 1e-15) break;
  }
  theta -= std::floor(theta);
  return theta;
}

}  // namespace

void CycleSettings::validate(std::size_t dim) const {
  if (!guess.empty() && guess.size() != dim) throw InvalidArgument("cycle.guess has the wrong dimension");
  if (!(relax_time >= 0.0)) throw InvalidArgument("cycle.relax_time must be nonnegative");
  if (!(newton_tol > 0.0)) throw InvalidArgument("cycle.newton_tol must be positive");
  if (!is_power_of_two(grid_N)) throw InvalidArgument("cycle.grid_N must be a power of two");
  if (phase_component >= static_cast<int>(dim)) throw InvalidArgument("cycle.phase_component out of range");
}

std::vector<double> default_guess(const VectorFieldModel& model) {
  if (model.name() == "ei") return {0.1, -1.0, 0.0, 0.1, -1.0, 0.0};
  if (model.name() == "oracle") return {1.3, 0.0};
  return std::vector<double>(model.dimension(), 0.1);
}

Cycle sample_cycle(const VectorFieldModel& model, std::span<const double> anchor, double T, std::size_t N,
                   const IntegratorSettings& integrator) {
  if (!is_power_of_two(N)) throw InvalidArgument("grid size must be a power of two");
  if (!(T > 0.0)) throw InvalidArgument("cycle period must be positive");
  std::vector<double> times(N + 1);
  for (std::size_t m = 0; m <= N; ++m) times[m] = static_cast<double>(m) * T / static_cast<double>(N);
  times[N] = T;
  const auto traj = flow_samples(model, anchor, times, integrator);
  Cycle c;
  c.anchor.assign(anchor.begin(), anchor.end());
  c.T = T;
  c.samples = RealGrid(model.dimension(), N);
  for (std::size_t m = 0; m < N; ++m) {
    for (std::size_t i = 0; i < model.dimension(); ++i) c.samples(i, m) = traj[m][i];
  }
  double r = 0.0;
  for (std::size_t i = 0; i < model.dimension(); ++i) r += std::pow(traj[N][i] - anchor[i], 2);
  c.closure_residual = std::sqrt(r);
  return c;
}

Cycle find_cycle(const VectorFieldModel& model, const CycleSettings& settings, const IntegratorSettings& integrator) {
  const std::size_t d = model.dimension();
  settings.validate(d);
  std::vector<double> x = settings.guess.empty() ? default_guess(model) : settings.guess;
  if (settings.relax_time > 0.0) x = flow(model, x, settings.relax_time, integrator);

  double T = estimate_period(model, x, std::max(1000.0, settings.relax_time), integrator);

  // Newton on (x, T): phi_T(x) - x = 0 with the correction orthogonal to X(x).
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < settings.max_newton && !converged; ++iter) {
    const std::vector<double> fx = model.eval(x);
    const double speed = norm2(fx);
    if (speed < settings.min_speed) {
      throw NumericalError("Poincare section degenerate: |X(x*)| = " + std::to_string(speed));
    }
    const VariationalState v = flow_with_variational(model, x, T, integrator);
    const std::vector<double> fT = model.eval(v.state);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(d + 1));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
    const auto di = static_cast<Eigen::Index>(d);
    A.topLeftCorner(di, di) = v.phi - Eigen::MatrixXd::Identity(di, di);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      A(ii, di) = fT[i];
      A(di, ii) = fx[i] / speed;
      rhs(ii) = -(v.state[i] - x[i]);
    }
    const Eigen::VectorXd delta = A.fullPivLu().solve(rhs);
    if (!delta.allFinite()) throw NumericalError("Newton step for the periodic orbit is not finite");
    for (std::size_t i = 0; i < d; ++i) x[i] += delta(static_cast<Eigen::Index>(i));
    T += delta(di);
    if (!(T > 0.0)) throw NumericalError("Newton iteration drove the period to a nonpositive value");
    const double scale = std::max(1.0, std::sqrt(norm2(x) * norm2(x) + T * T));
    converged = delta.norm() < settings.newton_tol * scale;
  }
  if (!converged) {
    throw NumericalError("Newton iteration for the periodic orbit did not converge in " +
                         std::to_string(settings.max_newton) + " iterations");
  }

  Cycle c = sample_cycle(model, x, T, settings.grid_N, integrator);
  if (settings.phase_component >= 0) {
    const double theta = phase_of_maximum(c.samples, static_cast<std::size_t>(settings.phase_component));
    if (theta > 0.0) {
      x = flow(model, x, theta * T, integrator);
      c = sample_cycle(model, x, T, settings.grid_N, integrator);
    }
  }
  c.newton_iterations = iter;
  return c;
}

Eigen::MatrixXd SegmentedVariational::monodromy() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(propagators.front().rows(), propagators.front().cols());
  for (const auto& P : propagators) M = (P * M).eval();
  return M;
}

SegmentedVariational segmented_variational(const VectorFieldModel& model, const Cycle& cycle, std::size_t segments,
                                           const IntegratorSettings& integrator) {
  const std::size_t N = cycle.samples.points();
  if (segments == 0 || N % segments != 0) throw InvalidArgument("segment count must divide the grid size");
  const std::size_t per = N / segments;
  SegmentedVariational sv;
  sv.segments = segments;
  sv.local.resize(N);
  sv.propagators.resize(segments);
  for (std::size_t i = 0; i < segments; ++i) {
    const std::size_t g0 = i * per;
    std::vector<double> times(per + 1);
    for (std::size_t k = 0; k <= per; ++k) {
      times[k] = static_cast<double>(k) * cycle.T / static_cast<double>(N);
    }
    // segment end lands exactly on the next node time
    times[per] = static_cast<double>(g0 + per) * cycle.T / static_cast<double>(N) -
                 static_cast<double>(g0) * cycle.T / static_cast<double>(N);
    const auto x0 = column_at(cycle.samples, g0);
    const auto vs = flow_with_variational_samples(model, x0, times, integrator);
    for (std::size_t k = 0; k < per; ++k) sv.local[g0 + k] = vs[k].phi;
    sv.propagators[i] = vs[per].phi;
    sv.trace_integral += vs[per].trace_integral;
    const auto lu = vs[per].phi.partialPivLu();
    const double det = lu.determinant();
    sv.log_abs_det += std::log(std::abs(det));
    if (det < 0.0) sv.det_sign = -sv.det_sign;
  }
  return sv;
}

CyclicEigen cyclic_eigen(const std::vector<Eigen::MatrixXd>& propagators, double T) {
  const std::size_t m = propagators.size();
  if (m == 0) throw InvalidArgument("cyclic_eigen needs at least one propagator");
  const auto d = propagators.front().rows();
  const auto n = static_cast<Eigen::Index>(m) * d;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = static_cast<Eigen::Index>((i + 1) % m) * d;
    const auto col = static_cast<Eigen::Index>(i) * d;
    C.block(row, col, d, d) = propagators[i];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration for the cyclic monodromy failed");

  const double md = static_cast<double>(m);
  const double edge = std::numbers::pi / md;
  struct Candidate {
    Eigen::Index index;
    double arg;
  };
  std::vector<Candidate> picked;
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx w = es.eigenvalues()(k);
    const double a = std::arg(w);
    if (std::abs(a) > edge * (1.0 + 1e-6)) continue;
    // negative multipliers give a conjugate pair at +-pi/m; keep +pi/m
    if (std::abs(a) > edge * (1.0 - 1e-6) && a < 0.0) continue;
    picked.push_back({k, a});
  }
  if (static_cast<Eigen::Index>(picked.size()) != d) {
    throw NumericalError("could not isolate the principal Floquet branch (" + std::to_string(picked.size()) +
                         " candidates for dimension " + std::to_string(d) + ")");
  }
  CyclicEigen out;
  for (const auto& c : picked) {
    const cplx w = es.eigenvalues()(c.index);
    cplx lambda = md * std::log(w) / T;
    if (std::abs(c.arg) > edge * (1.0 - 1e-6)) lambda = cplx(lambda.real(), std::numbers::pi / T);
    out.exponents.push_back(lambda);
    Eigen::MatrixXcd V(d, static_cast<Eigen::Index>(m));
    const Eigen::VectorXcd v = es.eigenvectors().col(c.index);
    for (std::size_t i = 0; i < m; ++i) V.col(static_cast<Eigen::Index>(i)) = v.segment(static_cast<Eigen::Index>(i) * d, d);
    out.node_vectors.push_back(std::move(V));
  }
  return out;
}

std::string class_name(FloquetClass c) {
  switch (c) {
    case FloquetClass::trivial:
      return "trivial";
    case FloquetClass::real_positive:
      return "real_positive";
    case FloquetClass::real_negative:
      return "real_negative";
    case FloquetClass::complex_pair_lead:
      return "complex_pair_lead";
    case FloquetClass::complex_pair_conjugate:
      return "complex_pair_conjugate";
  }
  return "unknown";
}

FloquetSpectrum floquet_spectrum(const VectorFieldModel& model, const Cycle& cycle, const FloquetSettings& settings,
                                 const IntegratorSettings& integrator) {
  const std::size_t d = model.dimension();
  const double T = cycle.T;
  const std::size_t N = cycle.samples.points();
  const SegmentedVariational sv = segmented_variational(model, cycle, settings.segments, integrator);
  CyclicEigen ce = cyclic_eigen(sv.propagators, T);
  const std::size_t m = sv.segments;
  const std::size_t per = N / m;

  // gauge: unit 2-norm at the node theta = 0, first nonzero component real positive
  for (auto& V : ce.node_vectors) {
    const double nrm = V.col(0).norm();
    Eigen::Index first = 0;
    while (first + 1 < V.rows() && std::abs(V(first, 0)) <= 1e-8 * nrm) ++first;
    const cplx phase = std::abs(V(first, 0)) > 0.0 ? std::conj(V(first, 0)) / std::abs(V(first, 0)) : cplx(1.0);
    V *= phase / nrm;
  }

  struct Mode {
    cplx lambda;
    Eigen::MatrixXcd V;
    FloquetClass cls;
  };
  std::vector<Mode> modes;
  for (std::size_t j = 0; j < d; ++j) modes.push_back({ce.exponents[j], ce.node_vectors[j], FloquetClass::real_positive});

  // trivial multiplier: exponent closest to zero
  const auto trivial = std::min_element(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    return std::abs(a.lambda) < std::abs(b.lambda);
  });
  const double mu0_err = std::abs(std::exp(trivial->lambda * T) - 1.0);
  if (mu0_err > 1e-6) {
    throw NumericalError("trivial Floquet multiplier off by " + std::to_string(mu0_err) +
                         " (inaccurate cycle or integration)");
  }
  trivial->cls = FloquetClass::trivial;
  trivial->lambda = 0.0;
  std::iter_swap(modes.begin(), trivial);

  const double pi_T = std::numbers::pi / T;
  for (std::size_t j = 1; j < d; ++j) {
    Mode& md = modes[j];
    const double im = md.lambda.imag() * T;
    if (std::abs(im) < settings.real_tol) {
      md.cls = FloquetClass::real_positive;
      md.lambda = md.lambda.real();
    } else if (std::abs(im - std::numbers::pi) < settings.real_tol) {
      md.cls = FloquetClass::real_negative;
      md.lambda = cplx(md.lambda.real(), pi_T);
    } else {
      md.cls = im > 0.0 ? FloquetClass::complex_pair_lead : FloquetClass::complex_pair_conjugate;
    }
  }
  // conjugate partners copy the lead exactly
  for (std::size_t j = 1; j < d; ++j) {
    if (modes[j].cls != FloquetClass::complex_pair_lead) continue;
    std::size_t best = d;
    double best_dist = INFINITY;
    for (std::size_t k = 1; k < d; ++k) {
      if (modes[k].cls != FloquetClass::complex_pair_conjugate) continue;
      const double dist = std::abs(modes[k].lambda - std::conj(modes[j].lambda));
      if (dist < best_dist) {
        best = k;
        best_dist = dist;
      }
    }
    if (best == d || best_dist > 1e-6 * std::max(1.0, std::abs(modes[j].lambda))) {
      throw NumericalError("complex Floquet exponent without a conjugate partner");
    }
    modes[best].lambda = std::conj(modes[j].lambda);
    modes[best].V = modes[j].V.conjugate();
    modes[best].cls = FloquetClass::complex_pair_conjugate;
    modes[best].lambda = std::conj(modes[j].lambda);
  }
  // sort: trivial first, then decreasing real part, leads before their partners
  std::stable_sort(modes.begin() + 1, modes.end(), [](const Mode& a, const Mode& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
  });

  FloquetSpectrum sp;
  sp.T = T;
  sp.segments = m;
  sp.trace_integral = sv.trace_integral;
  sp.log_abs_det = sv.log_abs_det;
  Eigen::MatrixXcd W(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    const Mode& md = modes[j];
    sp.exponents.push_back(md.lambda);
    cplx mu = std::exp(md.lambda * T);
    if (md.cls == FloquetClass::trivial || md.cls == FloquetClass::real_positive) mu = mu.real();
    if (md.cls == FloquetClass::real_negative) mu = -std::exp(md.lambda.real() * T);
    sp.multipliers.push_back(mu);
    sp.lyapunov.push_back(md.lambda.real());
    sp.eigenvectors.push_back(md.V.col(0));
    W.col(static_cast<Eigen::Index>(j)) = md.V.col(0);
    sp.classes.push_back(md.cls);
    if (j >= 1 && std::abs(mu) >= 1.0) {
      throw NumericalError("cycle is not attracting: |mu_" + std::to_string(j) + "| = " + std::to_string(std::abs(mu)));
    }

    ComplexGrid K(d, N);
    for (std::size_t g = 0; g < N; ++g) {
      const std::size_t i = g / per;
      const double dt = static_cast<double>(g - i * per) * T / static_cast<double>(N);
      const Eigen::VectorXcd v = std::exp(-md.lambda * dt) * (sv.local[g].cast<cplx>() * md.V.col(static_cast<Eigen::Index>(i)));
      for (std::size_t c = 0; c < d; ++c) K(c, g) = v(static_cast<Eigen::Index>(c));
    }
    sp.bundles.push_back(std::move(K));
  }
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(W);
  const auto& sv_vals = svd.singularValues();
  sp.eigenvector_condition = sv_vals(0) / sv_vals(sv_vals.size() - 1);
  if (!(sp.eigenvector_condition <= settings.max_condition)) {
    throw NumericalError("monodromy matrix is (nearly) defective: eigenvector condition number " +
                         std::to_string(sp.eigenvector_condition));
  }
  sp.slow_index = 1;
  return sp;
}

ResonanceReport check_resonances(const FloquetSpectrum& spectrum, std::size_t max_order, double tol,
                                 std::size_t grid_N) {
  if (max_order < 2) throw InvalidArgument("resonance order must be at least 2");
  const std::size_t d = spectrum.dimension();
  const double T = spectrum.T;
  const double w = kTwoPi / T;
  ResonanceReport rep;
  rep.max_order = max_order;
  rep.tol = tol;
  rep.min_residual = INFINITY;

  // distance to the nearest point of z + (2 pi i / T) Z
  auto mod_distance = [&](cplx z) {
    const double l = std::round(-z.imag() / w);
    return std::abs(z + cplx(0.0, w * l));
  };

  const std::size_t ndir = d - 1;
  std::vector<int> a(ndir, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos == ndir) {
      const int total = std::accumulate(a.begin(), a.end(), 0);
      if (total < 2) return;
      cplx s = 0.0;
      for (std::size_t i = 0; i < ndir; ++i) s += static_cast<double>(a[i]) * spectrum.exponents[i + 1];
      for (std::size_t k = 1; k < d; ++k) {
        ResonanceEntry e{a, k, mod_distance(s - spectrum.exponents[k])};
        rep.min_residual = std::min(rep.min_residual, e.residual);
        if (e.residual < tol) rep.flagged.push_back(e);
        rep.entries.push_back(std::move(e));
      }
      return;
    }
    for (int v = 0; v <= left; ++v) {
      a[pos] = v;
      rec(pos + 1, left - v);
    }
    a[pos] = 0;
  };
  if (ndir > 0) rec(0, static_cast<int>(max_order));

  const long kmin = -static_cast<long>(grid_N / 2);
  const long kmax = static_cast<long>(grid_N / 2) - 1;
  // min over k in [kmin, kmax] of |i w k + c|, optionally skipping k = 0
  auto min_over_k = [&](cplx c, bool skip_zero) {
    const long k0 = std::clamp(static_cast<long>(std::lround(-c.imag() / w)), kmin, kmax);
    double best = INFINITY;
    for (long k = std::max(kmin, k0 - 1); k <= std::min(kmax, k0 + 1); ++k) {
      if (skip_zero && k == 0) continue;
      best = std::min(best, std::abs(c + cplx(0.0, w * static_cast<double>(k))));
    }
    if (skip_zero && best == INFINITY) best = std::abs(c + cplx(0.0, w));
    return best;
  };
  const cplx ls = spectrum.exponents[spectrum.slow_index];
  for (std::size_t n = 1; n <= max_order; ++n) {
    const double nd = static_cast<double>(n);
    double km = INFINITY, zm = INFINITY, im = INFINITY;
    for (std::size_t j = 0; j < d; ++j) {
      const cplx lj = spectrum.exponents[j];
      if (n >= 2) km = std::min(km, min_over_k(nd * ls - lj, false));
      zm = std::min(zm, min_over_k(lj + nd * ls, false));
      im = std::min(im, min_over_k(lj + (nd - 1.0) * ls, n == 1 && j == 0));
    }
    if (n >= 2) rep.divisors.manifold.push_back(km);
    rep.divisors.phase.push_back(zm);
    rep.divisors.amplitude.push_back(im);
    rep.divisor_flag = rep.divisor_flag || (n >= 2 && km < tol) || zm < tol || im < tol;
  }
  return rep;
}

}  // namespace slowman
