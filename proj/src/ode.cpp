#include "slowman/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>

#include "integrator.hpp"

namespace slowman {

void IntegratorSettings::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("integrator tolerances must be positive");
  if (max_steps < 1) throw InvalidArgument("integrator.max_steps must be at least 1");
}

namespace {

using detail::AdaptiveIntegrator;
using State = std::vector<double>;

void check_dim(const VectorFieldModel& model, std::size_t n) {
  if (n != model.dimension()) throw InvalidArgument("initial state has wrong dimension for model '" + model.name() + "'");
}

void check_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
      throw InvalidArgument("sample times must be finite, nonnegative and nondecreasing");
    }
  }
}

struct FieldSystem {
  const VectorFieldModel& model;
  void operator()(const State& x, State& dxdt, double) const { model.eval(x, dxdt); }
};

// [x (d), Phi column-major (d*d), int trace]
struct VariationalSystem {
  const VectorFieldModel& model;
  mutable std::vector<double> J;
  void operator()(const State& y, State& dydt, double) const {
    const std::size_t d = model.dimension();
    std::span<const double> x(y.data(), d);
    model.eval(x, std::span<double>(dydt.data(), d));
    model.jacobian(x, J);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(J.data(), d, d);
    Eigen::Map<const Eigen::MatrixXd> P(y.data() + d, d, d);
    Eigen::Map<Eigen::MatrixXd> dP(dydt.data() + d, d, d);
    dP.noalias() = A * P;
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += J[i * d + i];
    dydt[d + d * d] = tr;
  }
};

// y' = sign * M(s) y with M = DX(gamma(s)) (sign +1) or DX^T (sign -1).
struct LinearizedSystem {
  const VectorFieldModel& model;
  const CycleInterpolant& cycle;
  bool adjoint;
  mutable std::vector<double> x;
  mutable std::vector<double> J;
  void operator()(const State& y, State& dydt, double t) const {
    const std::size_t d = model.dimension();
    cycle.evaluate(std::clamp(t, 0.0, cycle.span()), x);
    model.jacobian(x, J);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(J.data(), d, d);
    Eigen::Map<const Eigen::MatrixXd> P(y.data(), d, d);
    Eigen::Map<Eigen::MatrixXd> dP(dydt.data(), d, d);
    if (adjoint) {
      dP.noalias() = -A.transpose() * P;
    } else {
      dP.noalias() = A * P;
    }
  }
};

State identity_block(std::size_t d) {
  State y(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) y[i * d + i] = 1.0;
  return y;
}

VariationalState unpack_variational(const State& y, std::size_t d) {
  VariationalState v;
  v.state.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d));
  v.phi = Eigen::Map<const Eigen::MatrixXd>(y.data() + d, d, d);
  v.trace_integral = y[d + d * d];
  return v;
}

std::vector<Eigen::MatrixXd> linear_samples(const VectorFieldModel& model, const CycleInterpolant& cycle,
                                            std::span<const double> times, const IntegratorSettings& settings,
                                            bool adjoint, double t0 = 0.0) {
  check_times(times);
  if (cycle.dimension() != model.dimension()) throw InvalidArgument("cycle interpolant dimension mismatch");
  const double limit = cycle.span() * (1.0 + 1e-12);
  if (!times.empty() && times.back() > limit) {
    throw InvalidArgument("requested time exceeds the span of the cycle interpolant");
  }
  const std::size_t d = model.dimension();
  LinearizedSystem sys{model, cycle, adjoint, std::vector<double>(d), std::vector<double>(d * d)};
  AdaptiveIntegrator<double> integ(settings);
  State y = identity_block(d);
  double t = t0;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(times.size());
  for (double tk : times) {
    if (tk < t0) throw InvalidArgument("sample time precedes the start time");
    integ.advance(sys, y, t, tk);
    out.emplace_back(Eigen::Map<const Eigen::MatrixXd>(y.data(), d, d));
  }
  return out;
}

// [x (d), Phi (d*d), Psi (d*d)], both matrices column-major
template <class Real>
struct DualitySystem {
  const VectorFieldModel& model;
  mutable std::vector<Real> J;
  void operator()(const std::vector<Real>& y, std::vector<Real>& dydt, Real) const {
    const std::size_t d = model.dimension();
    std::span<const Real> x(y.data(), d);
    if constexpr (std::is_same_v<Real, double>) {
      model.eval(x, std::span<Real>(dydt.data(), d));
      model.jacobian(x, J);
    } else {
      model.eval_extended(x, std::span<Real>(dydt.data(), d));
      model.jacobian_extended(x, J);
    }
    const Real* P = y.data() + d;
    const Real* S = P + d * d;
    Real* dP = dydt.data() + d;
    Real* dS = dP + d * d;
    for (std::size_t col = 0; col < d; ++col) {
      for (std::size_t r = 0; r < d; ++r) {
        Real a(0), b(0);
        for (std::size_t k = 0; k < d; ++k) {
          a += J[r * d + k] * P[col * d + k];
          b -= J[k * d + r] * S[col * d + k];
        }
        dP[col * d + r] = a;
        dS[col * d + r] = b;
      }
    }
  }
};

template <class Real>
DualityReport duality_impl(const VectorFieldModel& model, std::span<const double> x0, std::span<const double> times,
                           const IntegratorSettings& settings) {
  const std::size_t d = model.dimension();
  DualitySystem<Real> sys{model, std::vector<Real>(d * d)};
  AdaptiveIntegrator<Real> integ(settings);
  std::vector<Real> y(d + 2 * d * d, Real(0));
  for (std::size_t i = 0; i < d; ++i) {
    y[i] = Real(x0[i]);
    y[d + i * d + i] = Real(1);
    y[d + d * d + i * d + i] = Real(1);
  }
  Real t(0);
  DualityReport rep;
  for (double tk : times) {
    integ.advance(sys, y, t, Real(tk));
    const Real* P = y.data() + d;
    const Real* S = P + d * d;
    double dev = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        Real s(a == b ? -1 : 0);
        for (std::size_t k = 0; k < d; ++k) s += S[a * d + k] * P[b * d + k];
        dev = std::max(dev, std::abs(static_cast<double>(s)));
      }
    }
    rep.times.push_back(tk);
    rep.deviation.push_back(dev);
  }
  rep.steps = integ.steps();
  return rep;
}

}  // namespace

DualityReport fundamental_duality(const VectorFieldModel& model, std::span<const double> x0,
                                  std::span<const double> times, const IntegratorSettings& settings,
                                  Precision precision) {
  check_dim(model, x0.size());
  check_times(times);
  DualityReport rep = precision == Precision::extended ? duality_impl<extended>(model, x0, times, settings)
                                                       : duality_impl<double>(model, x0, times, settings);
  rep.precision = precision;
  return rep;
}

std::vector<double> flow(const VectorFieldModel& model, std::span<const double> x0, double t,
                         const IntegratorSettings& settings) {
  check_dim(model, x0.size());
  if (!std::isfinite(t)) throw InvalidArgument("flow time must be finite");
  State x(x0.begin(), x0.end());
  if (t == 0.0) return x;
  FieldSystem sys{model};
  AdaptiveIntegrator<double> integ(settings);
  double s = 0.0;
  integ.advance(sys, x, s, t);
  return x;
}

std::vector<std::vector<double>> flow_samples(const VectorFieldModel& model, std::span<const double> x0,
                                              std::span<const double> times, const IntegratorSettings& settings) {
  check_dim(model, x0.size());
  check_times(times);
  FieldSystem sys{model};
  AdaptiveIntegrator<double> integ(settings);
  State x(x0.begin(), x0.end());
  double t = 0.0;
  std::vector<State> out;
  out.reserve(times.size());
  for (double tk : times) {
    integ.advance(sys, x, t, tk);
    out.push_back(x);
  }
  return out;
}

VariationalState flow_with_variational(const VectorFieldModel& model, std::span<const double> x0, double t,
                                       const IntegratorSettings& settings) {
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("variational flow time must be finite and nonnegative");
  const double times[1] = {t};
  return flow_with_variational_samples(model, x0, times, settings).front();
}

std::vector<VariationalState> flow_with_variational_samples(const VectorFieldModel& model,
                                                            std::span<const double> x0,
                                                            std::span<const double> times,
                                                            const IntegratorSettings& settings) {
  check_dim(model, x0.size());
  check_times(times);
  const std::size_t d = model.dimension();
  VariationalSystem sys{model, std::vector<double>(d * d)};
  AdaptiveIntegrator<double> integ(settings);
  State y(d + d * d + 1, 0.0);
  std::copy(x0.begin(), x0.end(), y.begin());
  for (std::size_t i = 0; i < d; ++i) y[d + i * d + i] = 1.0;
  double t = 0.0;
  std::vector<VariationalState> out;
  out.reserve(times.size());
  for (double tk : times) {
    integ.advance(sys, y, t, tk);
    out.push_back(unpack_variational(y, d));
  }
  return out;
}

CycleInterpolant::CycleInterpolant(const RealGrid& samples, double period_T)
    : dim_(samples.arity()), T_(period_T) {
  if (samples.period() != 1) throw InvalidArgument("cycle samples must be 1-periodic");
  if (!(period_T > 0.0)) throw InvalidArgument("cycle period must be positive");
  trig_ = TrigInterpolant(samples, 1e-15);
}

void CycleInterpolant::evaluate(double t, std::span<double> out) const {
  if (out.size() != dim_) throw InvalidArgument("cycle interpolant output has wrong size");
  trig_.evaluate(t / T_, out);
}

std::vector<double> CycleInterpolant::evaluate(double t) const {
  std::vector<double> v(dim_);
  evaluate(t, v);
  return v;
}

Eigen::MatrixXd adjoint_flow(const VectorFieldModel& model, const CycleInterpolant& cycle, double t1,
                             const IntegratorSettings& settings, double t0) {
  if (t1 < t0) throw InvalidArgument("adjoint_flow expects t0 <= t1");
  const double times[1] = {t1};
  return linear_samples(model, cycle, times, settings, true, t0).front();
}

std::vector<Eigen::MatrixXd> adjoint_flow_samples(const VectorFieldModel& model, const CycleInterpolant& cycle,
                                                  std::span<const double> times,
                                                  const IntegratorSettings& settings, double t0) {
  return linear_samples(model, cycle, times, settings, true, t0);
}

std::vector<Eigen::MatrixXd> linearized_flow_samples(const VectorFieldModel& model, const CycleInterpolant& cycle,
                                                     std::span<const double> times,
                                                     const IntegratorSettings& settings, double t0) {
  return linear_samples(model, cycle, times, settings, false, t0);
}

}  // namespace slowman
