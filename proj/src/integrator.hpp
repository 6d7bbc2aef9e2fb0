#pragma once

// Adaptive Runge-Kutta-Fehlberg 7(8) driver with a PI step-size controller.
// The stepper comes from Boost.Odeint; the step control is ours so the
// integrator can land exactly on requested output times and report failures
// with the time at which they happened.

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slowman/errors.hpp"
#include "slowman/ode.hpp"

namespace slowman::detail {

template <class Real>
class AdaptiveIntegrator {
 public:
  using State = std::vector<Real>;

  explicit AdaptiveIntegrator(const IntegratorSettings& s) : rtol_(s.rtol), atol_(s.atol), max_steps_(s.max_steps) {
    s.validate();
  }

  std::size_t steps() const noexcept { return steps_; }

  /// Advance x from t to t_end (either direction); on return t == t_end.
  template <class System>
  void advance(System& sys, State& x, Real& t, Real t_end) {
    if (t_end == t) return;
    const Real dir = t_end > t ? Real(1) : Real(-1);
    if (h_ == Real(0)) h_ = initial_step(sys, x, t, absr(t_end - t));
    State out(x.size()), err(x.size());
    while ((t_end - t) * dir > Real(0)) {
      if (steps_ >= max_steps_) throw IntegrationError("step budget exhausted", to_double(t));
      const Real remaining = absr(t_end - t);
      const bool last = h_ >= remaining;
      const Real h = last ? remaining : h_;
      stepper_.do_step(sys, x, t, out, dir * h, err);
      ++steps_;
      const double e = error_norm(x, out, err);
      if (!std::isfinite(e)) {
        set_step(h * Real(0.2), t);
        continue;
      }
      if (e <= 1.0) {
        x.swap(out);
        t = last ? t_end : t + dir * h;
        // PI controller for a 7th-order error estimate
        double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.7 / 8.0) * std::pow(e_prev_, 0.4 / 8.0);
        fac = std::clamp(fac, 0.2, 5.0);
        if (!last) {
          h_ = h * Real(fac);
        } else if (h * Real(fac) > h_) {
          h_ = h * Real(fac);
        }
        e_prev_ = std::max(e, 1e-4);
      } else {
        const double fac = 0.9 * std::pow(e, -1.0 / 8.0);
        set_step(h * Real(std::clamp(fac, 0.2, 0.9)), t);
      }
    }
  }

 private:
  static double to_double(const Real& v) { return static_cast<double>(v); }
  static Real absr(const Real& v) { return v < Real(0) ? -v : v; }

  void set_step(Real h, const Real& t) {
    h_ = h;
    const Real floor = Real(1e-14) * (absr(t) > Real(1) ? absr(t) : Real(1));
    if (h_ <= floor) {
      throw IntegrationError("step size underflow (non-finite or blowing-up state)", to_double(t));
    }
  }

  double error_norm(const State& x, const State& out, const State& err) const {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Real big = absr(x[i]) > absr(out[i]) ? absr(x[i]) : absr(out[i]);
      const Real sc = Real(atol_) + Real(rtol_) * big;
      const double r = to_double(absr(err[i]) / sc);
      if (!std::isfinite(to_double(out[i])) || !std::isfinite(r)) return INFINITY;
      m = std::max(m, r);
    }
    return m;
  }

  template <class System>
  Real initial_step(System& sys, const State& x, Real t, Real span) {
    State f(x.size());
    sys(x, f, t);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Real sc = Real(atol_) + Real(rtol_) * absr(x[i]);
      d0 = std::max(d0, to_double(absr(x[i]) / sc));
      d1 = std::max(d1, to_double(absr(f[i]) / sc));
    }
    const Real h = Real((d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1);
    return h < span ? h : span;
  }

  boost::numeric::odeint::runge_kutta_fehlberg78<State, Real, State, Real> stepper_;
  double rtol_;
  double atol_;
  std::size_t max_steps_;
  std::size_t steps_ = 0;
  Real h_ = Real(0);
  double e_prev_ = 1.0;
};

}  // namespace slowman::detail
