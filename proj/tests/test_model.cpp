#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "slowman/model.hpp"

using namespace slowman;

namespace {

// central differences with a step scaled to the coordinate
std::vector<double> fd_jacobian(const VectorFieldModel& m, std::vector<double> x) {
  const std::size_t d = x.size();
  std::vector<double> J(d * d);
  for (std::size_t j = 0; j < d; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    const double x0 = x[j];
    x[j] = x0 + h;
    const auto fp = m.eval(x);
    x[j] = x0 - h;
    const auto fm = m.eval(x);
    x[j] = x0;
    for (std::size_t i = 0; i < d; ++i) J[i * d + j] = (fp[i] - fm[i]) / (2 * h);
  }
  return J;
}

void check_model(const VectorFieldModel& m, const std::vector<double>& x) {
  const auto J = m.jacobian(x);
  const auto F = fd_jacobian(m, x);
  double scale = 1.0;
  for (double v : J) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < J.size(); ++i) CHECK(std::abs(J[i] - F[i]) < 1e-7 * scale);

  // the jet path: first-order coefficient of X(x + s v) is DX v
  const std::size_t d = x.size();
  const auto v = testing::random_vector(d, 99);
  std::vector<GridJet> in(d, GridJet(2, 1)), out(d, GridJet(2, 1));
  for (std::size_t i = 0; i < d; ++i) {
    in[i].coeff(0)[0] = x[i];
    in[i].coeff(1)[0] = v[i];
  }
  m.eval_jet(in, out);
  const auto f = m.eval(x);
  for (std::size_t i = 0; i < d; ++i) {
    double dv = 0.0;
    for (std::size_t j = 0; j < d; ++j) dv += J[i * d + j] * v[j];
    CHECK(out[i].coeff(0)[0] == doctest::Approx(f[i]).epsilon(1e-15));
    CHECK(std::abs(out[i].coeff(1)[0] - dv) < 1e-12 * scale);
  }

  std::vector<extended> xe(x.begin(), x.end()), fe(d);
  m.eval_extended(xe, fe);
  for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(static_cast<double>(fe[i]) - f[i]) < 1e-13 * (1 + std::abs(f[i])));
}

}  // namespace

TEST_CASE("oracle field in closed form") {
  const auto m = make_model("oracle");
  CHECK(m->dimension() == 2);
  const std::vector<double> x{0.6, -0.3};
  const double r2 = 0.45;
  const auto f = m->eval(x);
  CHECK(f[0] == doctest::Approx(0.6 + 0.3 - r2 * 0.6));
  CHECK(f[1] == doctest::Approx(0.6 - 0.3 + r2 * 0.3));
  // tr DX = 2 - 4 r^2
  CHECK(m->trace_jacobian(x) == doctest::Approx(2 - 4 * r2));
  check_model(*m, x);
}

TEST_CASE("E-I Jacobian against finite differences") {
  const auto m = make_model("ei");
  CHECK(m->component_names() == std::vector<std::string>{"r_e", "V_e", "S_ei", "r_i", "V_i", "S_ie"});
  check_model(*m, {0.05, -1.2, 0.7, 0.03, -0.8, 1.1});
  check_model(*m, {0.3, 0.5, 2.0, 0.01, 0.2, 4.0});
}

TEST_CASE("E-I Jacobian entries at the origin") {
  const auto m = make_model("ei");
  const auto J = m->jacobian(std::vector<double>(6, 0.0));
  // tau_e dV_e/dt = ... - tau_e S_ei
  CHECK(J[1 * 6 + 2] == doctest::Approx(-1.0));
  // tau_i dV_i/dt = ... + tau_i S_ie
  CHECK(J[4 * 6 + 5] == doctest::Approx(1.0));
  // dS_ei/dt = (J_ei r_i - S_ei) / tau_si
  CHECK(J[2 * 6 + 3] == doctest::Approx(15.0));
  CHECK(J[2 * 6 + 2] == doctest::Approx(-1.0));
}

TEST_CASE("parameter overrides") {
  EIParameters p;
  p.set("J_ei", 12.5);
  CHECK(p.J_ei == 12.5);
  CHECK_THROWS_AS(p.set("nope", 1.0), InvalidArgument);
  p.tau_e = -1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  const auto m = make_model("ei", {{"I_e_ext", 9.0}});
  CHECK(m->parameters().at("I_e_ext") == 9.0);
  CHECK_THROWS_AS(make_model("oracle", {{"a", 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(make_model("lorenz"), InvalidArgument);
  CHECK_THROWS_AS(m->eval(std::vector<double>(3)), InvalidArgument);
}

TEST_CASE("composition of the Jacobian transpose with a jet") {
  const auto m = make_model("ei");
  const std::vector<double> x{0.05, -1.2, 0.7, 0.03, -0.8, 1.1};
  std::vector<GridJet> K(6, GridJet(1, 1));
  for (std::size_t i = 0; i < 6; ++i) K[i].coeff(0)[0] = x[i];
  const auto F = compose_jacobian_transpose(*m, K);
  const auto J = m->jacobian(x);
  REQUIRE(F.size() == 36);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) CHECK(F[i * 6 + j].coeff(0)[0] == doctest::Approx(J[j * 6 + i]));
  }
}
