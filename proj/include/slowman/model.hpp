#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "slowman/fourier.hpp"
#include "slowman/jet.hpp"

namespace slowman {

/// Wider floating type for checks limited by conditioning rather than by the
/// method: IEEE binary128 where the compiler has it (long double is binary128
/// on aarch64 Linux).
#if defined(__SIZEOF_FLOAT128__) && !defined(__aarch64__)
using extended = __float128;
#else
using extended = long double;
#endif

inline extended constant_like(const extended&, double v) { return v; }

/// Analytic autonomous vector field x' = X(x). Implementations are immutable
/// after construction. Jacobians are row-major d x d.
class VectorFieldModel {
 public:
  virtual ~VectorFieldModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<std::string> component_names() const = 0;
  virtual std::map<std::string, double> parameters() const = 0;

  virtual void eval(std::span<const double> x, std::span<double> out) const = 0;
  virtual void jacobian(std::span<const double> x, std::span<double> out) const = 0;
  virtual void eval_jet(std::span<const GridJet> x, std::span<GridJet> out) const = 0;
  virtual void jacobian_jet(std::span<const GridJet> x, std::span<GridJet> out) const = 0;
  virtual void eval_extended(std::span<const extended> x, std::span<extended> out) const = 0;
  virtual void jacobian_extended(std::span<const extended> x, std::span<extended> out) const = 0;

  std::vector<double> eval(std::span<const double> x) const;
  std::vector<double> jacobian(std::span<const double> x) const;
  double trace_jacobian(std::span<const double> x) const;
};

/// Adapter for models written once as templates over the scalar type:
///   template <class S> void field(std::span<const S>, std::span<S>) const;
///   template <class S> void jac(std::span<const S>, std::span<S>) const;
/// so the double and jet paths execute the same arithmetic.
template <class Derived>
class TemplatedModel : public VectorFieldModel {
 public:
  void eval(std::span<const double> x, std::span<double> out) const override {
    check(x.size(), out.size(), 1);
    self().template field<double>(x, out);
  }
  void jacobian(std::span<const double> x, std::span<double> out) const override {
    check(x.size(), out.size(), dimension());
    self().template jac<double>(x, out);
  }
  void eval_jet(std::span<const GridJet> x, std::span<GridJet> out) const override {
    check(x.size(), out.size(), 1);
    self().template field<GridJet>(x, out);
  }
  void jacobian_jet(std::span<const GridJet> x, std::span<GridJet> out) const override {
    check(x.size(), out.size(), dimension());
    self().template jac<GridJet>(x, out);
  }
  void eval_extended(std::span<const extended> x, std::span<extended> out) const override {
    check(x.size(), out.size(), 1);
    self().template field<extended>(x, out);
  }
  void jacobian_extended(std::span<const extended> x, std::span<extended> out) const override {
    check(x.size(), out.size(), dimension());
    self().template jac<extended>(x, out);
  }
  using VectorFieldModel::eval;
  using VectorFieldModel::jacobian;

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
  void check(std::size_t in, std::size_t out, std::size_t mult) const {
    if (in != dimension() || out != dimension() * mult) {
      throw InvalidArgument("state dimension does not match model '" + name() + "'");
    }
  }
};

struct EIParameters {
  double tau_e = 10.0;
  double tau_i = 10.0;
  double tau_se = 1.0;
  double tau_si = 1.0;
  double delta_e = 1.0;
  double delta_i = 1.0;
  double eta_e = -5.0;
  double eta_i = -5.0;
  double J_ei = 15.0;
  double J_ie = 15.0;
  double I_e_ext = 10.0;
  double I_i_ext = 0.0;

  /// Set a parameter by its field name; unknown names throw.
  void set(const std::string& name, double value);
  std::map<std::string, double> as_map() const;
  void validate() const;
};

std::shared_ptr<const VectorFieldModel> make_ei_model(const EIParameters& params = {});
std::shared_ptr<const VectorFieldModel> make_oracle_model();
/// "ei" or "oracle"; overrides are applied by parameter name (ei only).
std::shared_ptr<const VectorFieldModel> make_model(const std::string& name,
                                                   const std::map<std::string, double>& overrides = {});

enum class JetMode { field, jacobian_transpose };

/// Order-L jet of X(K) (arity d) or DX^T(K) (arity d*d, row-major) where L is
/// the order of K.
FourierTaylor jet_compose(const VectorFieldModel& model, const FourierTaylor& K, JetMode mode);

/// Grid-level variants used by the recursions: jets in, jets out.
std::vector<GridJet> compose_field(const VectorFieldModel& model, std::span<const GridJet> K);
std::vector<GridJet> compose_jacobian_transpose(const VectorFieldModel& model, std::span<const GridJet> K);

}  // namespace slowman
