#include "slowman/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slowman/fourier.hpp"

namespace slowman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool has_negative(const std::vector<FloquetClass>& classes) {
  return std::any_of(classes.begin(), classes.end(), [](FloquetClass c) { return c == FloquetClass::real_negative; });
}

// All d*d entries of a frame as one grid (entry (r, c) is component r * d + c).
ComplexGrid entries_grid(const Frame& f) {
  const std::size_t d = f.dimension();
  ComplexGrid g(d * d, f.points(), f.period);
  for (std::size_t m = 0; m < f.points(); ++m) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) g(r * d + c, m) = f.values[m](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return g;
}

}  // namespace

std::string representation_name(Representation r) { return r == Representation::complex ? "complex" : "real"; }

Representation parse_representation(const std::string& s) {
  if (s == "complex") return Representation::complex;
  if (s == "real") return Representation::real;
  throw InvalidArgument("unknown representation '" + s + "' (expected complex or real)");
}

ComplexGrid Frame::column(std::size_t j) const {
  const std::size_t d = dimension();
  if (j >= d) throw InvalidArgument("frame column out of range");
  ComplexGrid g(d, points(), period);
  for (std::size_t m = 0; m < points(); ++m) {
    for (std::size_t c = 0; c < d; ++c) g(c, m) = values[m](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
  }
  return g;
}

RealGrid Frame::real_column(std::size_t j) const { return real_part(column(j)); }

RealGrid tangent_column(const VectorFieldModel& model, const Cycle& cycle) {
  const std::size_t d = model.dimension();
  const std::size_t N = cycle.samples.points();
  RealGrid out(d, N);
  std::vector<double> f(d);
  for (std::size_t m = 0; m < N; ++m) {
    model.eval(cycle.samples.at(m), f);
    for (std::size_t c = 0; c < d; ++c) out(c, m) = cycle.T * f[c];
  }
  return out;
}

Frame build_bundle_frame(const VectorFieldModel& model, const Cycle& cycle, const FloquetSpectrum& spectrum,
                         Representation representation, std::span<const double> scale) {
  const std::size_t d = spectrum.dimension();
  const std::size_t N = cycle.samples.points();
  if (cycle.samples.arity() != d || spectrum.bundles.size() != d) {
    throw InvalidArgument("cycle and spectrum dimensions disagree");
  }
  if (!scale.empty() && scale.size() != d - 1) {
    throw InvalidArgument("bundle scale needs one value per nontrivial direction (" + std::to_string(d - 1) + ")");
  }
  for (double b : scale) {
    if (!std::isfinite(b) || b == 0.0) throw InvalidArgument("bundle scale must be finite and nonzero");
  }

  // scaled complex columns, period 1. K_0' = T X(K_0) pointwise: same as the
  // spectral derivative up to aliasing, without amplifying sampling noise.
  std::vector<ComplexGrid> cols;
  cols.push_back(to_complex(tangent_column(model, cycle)));
  for (std::size_t j = 1; j < d; ++j) {
    ComplexGrid K = spectrum.bundles[j];
    if (K.points() != N) throw InvalidArgument("bundle grid does not match the cycle grid");
    const double b = scale.empty() ? 1.0 : scale[j - 1];
    const double s = b / grid_max_norm(K);
    for (auto& v : K.data()) v *= s;
    cols.push_back(std::move(K));
  }

  Frame f;
  f.kind = FrameKind::bundle;
  f.representation = representation;
  f.T = spectrum.T;
  f.classes = spectrum.classes;
  f.generator = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));

  if (representation == Representation::complex) {
    f.period = 1;
    for (std::size_t j = 0; j < d; ++j) f.generator(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = spectrum.exponents[j];
    f.values.assign(N, Eigen::MatrixXcd(d, d));
    for (std::size_t m = 0; m < N; ++m) {
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t c = 0; c < d; ++c) f.values[m](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = cols[j](c, m);
      }
    }
    return f;
  }

  f.period = has_negative(spectrum.classes) ? 2 : 1;
  const std::size_t M = N * static_cast<std::size_t>(f.period);
  f.values.assign(M, Eigen::MatrixXcd::Zero(d, d));
  for (std::size_t j = 0; j < d; ++j) {
    const auto J = static_cast<Eigen::Index>(j);
    const cplx lam = spectrum.exponents[j];
    switch (spectrum.classes[j]) {
      case FloquetClass::trivial:
      case FloquetClass::real_positive:
        f.generator(J, J) = lam.real();
        for (std::size_t g = 0; g < M; ++g) {
          for (std::size_t c = 0; c < d; ++c) f.values[g](static_cast<Eigen::Index>(c), J) = cols[j](c, g % N).real();
        }
        break;
      case FloquetClass::real_negative:
        f.generator(J, J) = lam.real();
        for (std::size_t g = 0; g < M; ++g) {
          const double theta = static_cast<double>(g) / static_cast<double>(N);
          const cplx rot = std::polar(1.0, std::numbers::pi * theta);
          for (std::size_t c = 0; c < d; ++c) f.values[g](static_cast<Eigen::Index>(c), J) = (rot * cols[j](c, g % N)).real();
        }
        break;
      case FloquetClass::complex_pair_lead: {
        if (j + 1 >= d || spectrum.classes[j + 1] != FloquetClass::complex_pair_conjugate) {
          throw InvalidArgument("complex pair lead must be followed by its conjugate");
        }
        f.generator(J, J) = lam.real();
        f.generator(J, J + 1) = lam.imag();
        f.generator(J + 1, J) = -lam.imag();
        f.generator(J + 1, J + 1) = lam.real();
        for (std::size_t g = 0; g < M; ++g) {
          for (std::size_t c = 0; c < d; ++c) {
            const cplx v = cols[j](c, g % N);
            f.values[g](static_cast<Eigen::Index>(c), J) = v.real();
            f.values[g](static_cast<Eigen::Index>(c), J + 1) = v.imag();
          }
        }
        break;
      }
      case FloquetClass::complex_pair_conjugate:
        // filled together with its lead
        break;
    }
  }
  return f;
}

Frame build_adjoint_frame(const Frame& bundle, double max_condition) {
  if (bundle.kind != FrameKind::bundle) throw InvalidArgument("build_adjoint_frame expects a bundle frame");
  Frame q = bundle;
  q.kind = FrameKind::adjoint;
  const auto d = static_cast<Eigen::Index>(bundle.dimension());
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  for (std::size_t m = 0; m < bundle.points(); ++m) {
    const Eigen::MatrixXcd& F = bundle.values[m];
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F);
    const auto& s = svd.singularValues();
    const double cond = s(0) / s(d - 1);
    if (!(cond <= max_condition)) {
      throw NumericalError("bundle frame singular at theta = " + std::to_string(bundle.theta(m)) +
                           " (condition number " + std::to_string(cond) + ")");
    }
    q.values[m] = F.transpose().partialPivLu().solve(I);
  }
  return q;
}

std::vector<Eigen::MatrixXd> jacobians_on_grid(const VectorFieldModel& model, const RealGrid& cycle_samples,
                                               int period) {
  const std::size_t d = model.dimension();
  const std::size_t N = cycle_samples.points();
  std::vector<Eigen::MatrixXd> base(N);
  std::vector<double> J(d * d);
  for (std::size_t m = 0; m < N; ++m) {
    const auto x = cycle_samples.at(m);
    model.jacobian(x, J);
    base[m] = Eigen::Map<const RowMatrix>(J.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(N * static_cast<std::size_t>(period));
  for (int p = 0; p < period; ++p) out.insert(out.end(), base.begin(), base.end());
  return out;
}

FrameReport frame_report(const VectorFieldModel& model, const RealGrid& cycle_samples, const Frame& frame) {
  const std::size_t d = frame.dimension();
  const auto D = static_cast<Eigen::Index>(d);
  const auto jac = jacobians_on_grid(model, cycle_samples, frame.period);
  if (jac.size() != frame.points()) throw InvalidArgument("frame grid does not match the cycle grid");
  const ComplexGrid deriv = spectral_derivative(entries_grid(frame));
  FrameReport rep;
  rep.ode_residual.assign(d, 0.0);
  rep.ode_residual_abs.assign(d, 0.0);
  std::vector<double> col_norm(d, 0.0);
  const double invT = 1.0 / frame.T;
  for (std::size_t m = 0; m < frame.points(); ++m) {
    Eigen::MatrixXcd Fp(D, D);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) Fp(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = deriv(r * d + c, m);
    }
    const Eigen::MatrixXcd& F = frame.values[m];
    const Eigen::MatrixXcd A = jac[m].cast<cplx>();
    Eigen::MatrixXcd R;
    if (frame.kind == FrameKind::bundle) {
      R = invT * Fp - A * F + F * frame.generator;
    } else {
      R = invT * Fp + A.transpose() * F - F * frame.generator.transpose();
    }
    for (std::size_t j = 0; j < d; ++j) {
      rep.ode_residual_abs[j] = std::max(rep.ode_residual_abs[j], R.col(static_cast<Eigen::Index>(j)).norm());
      col_norm[j] = std::max(col_norm[j], F.col(static_cast<Eigen::Index>(j)).norm());
    }
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F);
    const auto& s = svd.singularValues();
    rep.max_condition = std::max(rep.max_condition, s(0) / s(D - 1));
  }
  for (std::size_t j = 0; j < d; ++j) rep.ode_residual[j] = rep.ode_residual_abs[j] / col_norm[j];
  rep.max_ode_residual = *std::max_element(rep.ode_residual.begin(), rep.ode_residual.end());
  return rep;
}

double biorthogonality_error(const Frame& bundle, const Frame& adjoint) {
  if (bundle.points() != adjoint.points()) throw InvalidArgument("frames live on different grids");
  const auto d = static_cast<Eigen::Index>(bundle.dimension());
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  double err = 0.0;
  for (std::size_t m = 0; m < bundle.points(); ++m) {
    err = std::max(err, (adjoint.values[m].transpose() * bundle.values[m] - I).cwiseAbs().maxCoeff());
  }
  return err;
}

double phase_normalization_error(const VectorFieldModel& model, const RealGrid& cycle_samples,
                                 const Frame& adjoint) {
  const std::size_t d = model.dimension();
  const std::size_t N = cycle_samples.points();
  std::vector<double> f(d);
  double err = 0.0;
  for (std::size_t g = 0; g < adjoint.points(); ++g) {
    const auto x = cycle_samples.at(g % N);
    model.eval(x, f);
    cplx s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += adjoint.values[g](static_cast<Eigen::Index>(c), 0) * f[c];
    err = std::max(err, std::abs(s - 1.0 / adjoint.T));
  }
  return err;
}

double antiperiodicity_error(const Frame& frame, std::size_t column) {
  if (frame.period != 2) throw InvalidArgument("antiperiodicity needs a period-2 frame");
  const std::size_t half = frame.points() / 2;
  const auto J = static_cast<Eigen::Index>(column);
  double err = 0.0;
  for (std::size_t m = 0; m < half; ++m) {
    err = std::max(err, (frame.values[m].col(J) + frame.values[m + half].col(J)).norm());
  }
  return err;
}

double negative_bundle_relation_error(const Frame& complex_bundle, const Frame& real_bundle, std::size_t column) {
  if (complex_bundle.representation != Representation::complex || real_bundle.representation != Representation::real) {
    throw InvalidArgument("expected a complex and a real bundle frame");
  }
  const std::size_t N = complex_bundle.points();
  const auto J = static_cast<Eigen::Index>(column);
  double err = 0.0;
  for (std::size_t g = 0; g < real_bundle.points(); ++g) {
    const double theta = real_bundle.theta(g);
    const cplx rot = std::polar(1.0, -std::numbers::pi * theta);
    err = std::max(err, (complex_bundle.values[g % N].col(J) - rot * real_bundle.values[g].col(J)).norm());
  }
  return err;
}

AdjointCrossCheck cross_check_adjoint_frame(const VectorFieldModel& model, const Cycle& cycle,
                                            const FloquetSpectrum& spectrum, const Frame& bundle,
                                            const Frame& adjoint, std::size_t segments,
                                            const IntegratorSettings& integrator) {
  if (adjoint.representation != Representation::complex || adjoint.kind != FrameKind::adjoint ||
      bundle.representation != Representation::complex) {
    throw InvalidArgument("the adjoint cross-check works on complex frames");
  }
  const std::size_t d = spectrum.dimension();
  const std::size_t N = cycle.samples.points();
  const double T = cycle.T;
  if (segments == 0 || N % segments != 0) throw InvalidArgument("segment count must divide the grid size");
  const std::size_t per = N / segments;
  const CycleInterpolant interp(cycle.samples, T);
  auto time_of = [&](std::size_t g) { return static_cast<double>(g) * T / static_cast<double>(N); };

  std::vector<Eigen::MatrixXd> local(N);
  std::vector<Eigen::MatrixXd> props(segments);
  for (std::size_t i = 0; i < segments; ++i) {
    const std::size_t g0 = i * per;
    std::vector<double> times(per + 1);
    for (std::size_t k = 0; k <= per; ++k) times[k] = time_of(g0 + k);
    const auto psi = adjoint_flow_samples(model, interp, times, integrator, time_of(g0));
    for (std::size_t k = 0; k < per; ++k) local[g0 + k] = psi[k];
    props[i] = psi[per];
  }
  const CyclicEigen ce = cyclic_eigen(props, T);
  const double w = kTwoPi / T;

  AdjointCrossCheck out;
  for (std::size_t j = 0; j < d; ++j) {
    const cplx lam = spectrum.exponents[j];

    // multiplier duality
    const cplx expected = std::exp(-std::conj(lam) * T);
    double best = INFINITY;
    cplx found = 0.0;
    for (const cplx& eta : ce.exponents) {
      const cplx mu = std::exp(eta * T);
      const double e = std::abs(mu - expected) / std::abs(expected);
      if (e < best) {
        best = e;
        found = mu;
      }
    }
    out.psi_multipliers.push_back(found);
    out.expected_multipliers.push_back(expected);
    out.max_multiplier_error = std::max(out.max_multiplier_error, best);

    // eigen-branch of Psi_T carrying the iARC of lambda_j: eta = -lambda_j mod 2 pi i / T
    std::size_t pick = ce.exponents.size();
    double dist = INFINITY;
    for (std::size_t q = 0; q < ce.exponents.size(); ++q) {
      const cplx z = ce.exponents[q] + lam;
      const double l = std::round(z.imag() / w);
      const double dq = std::abs(z - cplx(0.0, w * l));
      if (dq < dist) {
        dist = dq;
        pick = q;
      }
    }
    if (pick == ce.exponents.size() || dist > 1e-6 * std::max(1.0, std::abs(lam))) {
      throw NumericalError("no adjoint Floquet exponent matches -lambda_" + std::to_string(j));
    }
    const cplx rate = ce.exponents[pick] + lam;
    const Eigen::MatrixXcd& V = ce.node_vectors[pick];

    ComplexGrid u(d, N);
    cplx gauge = 0.0;
    for (std::size_t g = 0; g < N; ++g) {
      const std::size_t i = g / per;
      const double ti = time_of(i * per);
      const Eigen::VectorXcd ui = std::exp(rate * ti) * V.col(static_cast<Eigen::Index>(i));
      const Eigen::VectorXcd ug = std::exp(lam * (time_of(g) - ti)) * (local[g].cast<cplx>() * ui);
      for (std::size_t c = 0; c < d; ++c) u(c, g) = ug(static_cast<Eigen::Index>(c));
      gauge += ug.cwiseProduct(bundle.values[g].col(static_cast<Eigen::Index>(j))).sum();
    }
    gauge /= static_cast<double>(N);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t g = 0; g < N; ++g) {
      double e2 = 0.0, s2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const cplx q = adjoint.values[g](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
        e2 += std::norm(u(c, g) / gauge - q);
        s2 += std::norm(q);
      }
      err = std::max(err, std::sqrt(e2));
      scale = std::max(scale, std::sqrt(s2));
    }
    out.column_error.push_back(err);
    out.column_relative_error.push_back(err / scale);
    out.max_column_error = std::max(out.max_column_error, err);
  }
  return out;
}

}  // namespace slowman
