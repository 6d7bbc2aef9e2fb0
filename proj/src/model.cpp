#include "slowman/model.hpp"

#include <cmath>
#include <numbers>

namespace slowman {

std::vector<double> VectorFieldModel::eval(std::span<const double> x) const {
  std::vector<double> out(dimension());
  eval(x, out);
  return out;
}

std::vector<double> VectorFieldModel::jacobian(std::span<const double> x) const {
  std::vector<double> out(dimension() * dimension());
  jacobian(x, out);
  return out;
}

double VectorFieldModel::trace_jacobian(std::span<const double> x) const {
  const std::vector<double> J = jacobian(x);
  const std::size_t d = dimension();
  double tr = 0.0;
  for (std::size_t i = 0; i < d; ++i) tr += J[i * d + i];
  return tr;
}

namespace {

#define SLOWMAN_EI_FIELDS(X)                                                                            \
  X(tau_e) X(tau_i) X(tau_se) X(tau_si) X(delta_e) X(delta_i) X(eta_e) X(eta_i) X(J_ei) X(J_ie) X(I_e_ext) \
      X(I_i_ext)

// State (r_e, V_e, S_ei, r_i, V_i, S_ie). Every equation is divided through by
// its time constant; the quadratic firing-rate term is (pi tau r)^2.
class EIModel final : public TemplatedModel<EIModel> {
 public:
  explicit EIModel(const EIParameters& p) : p_(p) {
    p_.validate();
    ce_ = (std::numbers::pi * p.tau_e) * (std::numbers::pi * p.tau_e);
    ci_ = (std::numbers::pi * p.tau_i) * (std::numbers::pi * p.tau_i);
  }

  std::string name() const override { return "ei"; }
  std::size_t dimension() const override { return 6; }
  std::vector<std::string> component_names() const override {
    return {"r_e", "V_e", "S_ei", "r_i", "V_i", "S_ie"};
  }
  std::map<std::string, double> parameters() const override { return p_.as_map(); }

  template <class S>
  void field(std::span<const S> x, std::span<S> out) const {
    const S& re = x[0];
    const S& ve = x[1];
    const S& sei = x[2];
    const S& ri = x[3];
    const S& vi = x[4];
    const S& sie = x[5];
    const double pi = std::numbers::pi;
    out[0] = (2.0 * (re * ve) + p_.delta_e / (pi * p_.tau_e)) * (1.0 / p_.tau_e);
    out[1] = (ve * ve - ce_ * (re * re) - p_.tau_e * sei + (p_.eta_e + p_.I_e_ext)) * (1.0 / p_.tau_e);
    out[2] = (p_.J_ei * ri - sei) * (1.0 / p_.tau_si);
    out[3] = (2.0 * (ri * vi) + p_.delta_i / (pi * p_.tau_i)) * (1.0 / p_.tau_i);
    out[4] = (vi * vi - ci_ * (ri * ri) + p_.tau_i * sie + (p_.eta_i + p_.I_i_ext)) * (1.0 / p_.tau_i);
    out[5] = (p_.J_ie * re - sie) * (1.0 / p_.tau_se);
  }

  template <class S>
  void jac(std::span<const S> x, std::span<S> J) const {
    const S& re = x[0];
    const S& ve = x[1];
    const S& ri = x[3];
    const S& vi = x[4];
    const S zero = constant_like(re, 0.0);
    for (auto& e : J) e = zero;
    const double ke = 2.0 / p_.tau_e;
    const double ki = 2.0 / p_.tau_i;
    J[0 * 6 + 0] = ke * ve;
    J[0 * 6 + 1] = ke * re;
    J[1 * 6 + 0] = (-ce_ * ke) * re;
    J[1 * 6 + 1] = ke * ve;
    J[1 * 6 + 2] = constant_like(re, -1.0);
    J[2 * 6 + 2] = constant_like(re, -1.0 / p_.tau_si);
    J[2 * 6 + 3] = constant_like(re, p_.J_ei / p_.tau_si);
    J[3 * 6 + 3] = ki * vi;
    J[3 * 6 + 4] = ki * ri;
    J[4 * 6 + 3] = (-ci_ * ki) * ri;
    J[4 * 6 + 4] = ki * vi;
    J[4 * 6 + 5] = constant_like(re, 1.0);
    J[5 * 6 + 0] = constant_like(re, p_.J_ie / p_.tau_se);
    J[5 * 6 + 5] = constant_like(re, -1.0 / p_.tau_se);
  }

 private:
  EIParameters p_;
  double ce_ = 0.0;
  double ci_ = 0.0;
};

// x' = x - y - r^2 x, y' = x + y - r^2 y: unit circle, T = 2 pi, lambda = -2.
class OracleModel final : public TemplatedModel<OracleModel> {
 public:
  std::string name() const override { return "oracle"; }
  std::size_t dimension() const override { return 2; }
  std::vector<std::string> component_names() const override { return {"x", "y"}; }
  std::map<std::string, double> parameters() const override { return {}; }

  template <class S>
  void field(std::span<const S> u, std::span<S> out) const {
    const S& x = u[0];
    const S& y = u[1];
    const S r2 = x * x + y * y;
    out[0] = x - y - r2 * x;
    out[1] = x + y - r2 * y;
  }

  template <class S>
  void jac(std::span<const S> u, std::span<S> J) const {
    const S& x = u[0];
    const S& y = u[1];
    const S xx = x * x;
    const S yy = y * y;
    const S xy = x * y;
    J[0] = 1.0 - 3.0 * xx - yy;
    J[1] = -1.0 - 2.0 * xy;
    J[2] = 1.0 - 2.0 * xy;
    J[3] = 1.0 - xx - 3.0 * yy;
  }
};

}  // namespace

void EIParameters::set(const std::string& name, double value) {
#define SLOWMAN_SET(f)  \
  if (name == #f) {     \
    f = value;          \
    return;             \
  }
  SLOWMAN_EI_FIELDS(SLOWMAN_SET)
#undef SLOWMAN_SET
  throw InvalidArgument("unknown E-I parameter '" + name + "'");
}

std::map<std::string, double> EIParameters::as_map() const {
  std::map<std::string, double> m;
#define SLOWMAN_PUT(f) m[#f] = f;
  SLOWMAN_EI_FIELDS(SLOWMAN_PUT)
#undef SLOWMAN_PUT
  return m;
}

void EIParameters::validate() const {
  for (double t : {tau_e, tau_i, tau_se, tau_si}) {
    if (!(t > 0.0)) throw InvalidArgument("E-I time constants must be positive");
  }
  if (!(delta_e > 0.0) || !(delta_i > 0.0)) throw InvalidArgument("E-I widths delta_e, delta_i must be positive");
}

std::shared_ptr<const VectorFieldModel> make_ei_model(const EIParameters& params) {
  return std::make_shared<EIModel>(params);
}

std::shared_ptr<const VectorFieldModel> make_oracle_model() { return std::make_shared<OracleModel>(); }

std::shared_ptr<const VectorFieldModel> make_model(const std::string& name,
                                                   const std::map<std::string, double>& overrides) {
  if (name == "ei") {
    EIParameters p;
    for (const auto& [k, v] : overrides) p.set(k, v);
    return make_ei_model(p);
  }
  if (name == "oracle") {
    if (!overrides.empty()) throw InvalidArgument("the oracle model has no parameters");
    return make_oracle_model();
  }
  throw InvalidArgument("unknown model '" + name + "' (expected ei or oracle)");
}

std::vector<GridJet> compose_field(const VectorFieldModel& model, std::span<const GridJet> K) {
  if (K.size() != model.dimension()) throw InvalidArgument("jet arity does not match model dimension");
  std::vector<GridJet> out(K.size());
  model.eval_jet(K, out);
  return out;
}

std::vector<GridJet> compose_jacobian_transpose(const VectorFieldModel& model, std::span<const GridJet> K) {
  const std::size_t d = model.dimension();
  if (K.size() != d) throw InvalidArgument("jet arity does not match model dimension");
  std::vector<GridJet> J(d * d);
  model.jacobian_jet(K, J);
  std::vector<GridJet> Jt(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) Jt[i * d + j] = std::move(J[j * d + i]);
  }
  return Jt;
}

FourierTaylor jet_compose(const VectorFieldModel& model, const FourierTaylor& K, JetMode mode) {
  if (K.empty()) throw InvalidArgument("jet_compose: order-0 coefficient missing");
  if (K.arity() != model.dimension()) throw InvalidArgument("jet_compose: series arity does not match model");
  const std::vector<GridJet> jets = to_jets(K, K.order());
  const std::vector<GridJet> out =
      mode == JetMode::field ? compose_field(model, jets) : compose_jacobian_transpose(model, jets);
  return from_jets(out, K.period());
}

}  // namespace slowman
