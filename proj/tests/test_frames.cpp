#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "slowman/frames.hpp"

using namespace slowman;
using testing::two_pi;

namespace {

struct OracleData {
  std::shared_ptr<const VectorFieldModel> model = make_model("oracle");
  Cycle cycle;
  FloquetSpectrum spectrum;
  OracleData() {
    CycleSettings cs;
    cs.grid_N = 256;
    cycle = find_cycle(*model, cs);
    FloquetSettings fs;
    fs.segments = 16;
    spectrum = floquet_spectrum(*model, cycle, fs);
  }
};

const OracleData& oracle() {
  static const OracleData d;
  return d;
}

}  // namespace

TEST_CASE("representation names") {
  CHECK(parse_representation("real") == Representation::real);
  CHECK(parse_representation("complex") == Representation::complex);
  CHECK(representation_name(Representation::real) == "real");
  CHECK_THROWS_AS(parse_representation("polar"), InvalidArgument);
}

TEST_CASE("oracle frames in closed form") {
  const auto& o = oracle();
  for (auto rep : {Representation::complex, Representation::real}) {
    for (double b : {1.0, 2.5}) {
      const double scale[] = {b};
      const auto F = build_bundle_frame(*o.model, o.cycle, o.spectrum, rep, scale);
      const auto Q = build_adjoint_frame(F);
      CHECK(F.period == 1);
      CHECK(F.points() == 256);
      // the sign of the slow column is a free gauge; read it off at theta = 0
      const double s = F.values[0](0, 1).real() > 0 ? 1.0 : -1.0;
      for (std::size_t m = 0; m < 256; m += 5) {
        const double th = two_pi * F.theta(m);
        const double c = std::cos(th), sn = std::sin(th);
        // K_0' = T X(gamma) = 2 pi (-sin, cos)
        CHECK(std::abs(F.values[m](0, 0) - cplx(-two_pi * sn)) < 1e-9);
        CHECK(std::abs(F.values[m](1, 0) - cplx(two_pi * c)) < 1e-9);
        CHECK(std::abs(F.values[m](0, 1) - cplx(s * b * c)) < 1e-9);
        CHECK(std::abs(F.values[m](1, 1) - cplx(s * b * sn)) < 1e-9);
        // iPRC (-sin, cos) / (2 pi) and slow iARC (cos, sin) / b
        CHECK(std::abs(Q.values[m](0, 0) - cplx(-sn / two_pi)) < 1e-10);
        CHECK(std::abs(Q.values[m](1, 0) - cplx(c / two_pi)) < 1e-10);
        CHECK(std::abs(Q.values[m](0, 1) - cplx(s * c / b)) < 1e-10);
        CHECK(std::abs(Q.values[m](1, 1) - cplx(s * sn / b)) < 1e-10);
      }
      CHECK(std::abs(F.generator(1, 1) - cplx(-2.0)) < 1e-8);
      CHECK(biorthogonality_error(F, Q) < 1e-14);
      CHECK(phase_normalization_error(*o.model, o.cycle.samples, Q) < 1e-12);
      const auto fr = frame_report(*o.model, o.cycle.samples, F);
      CHECK(fr.max_ode_residual < 1e-9);
      CHECK(fr.max_condition == doctest::Approx(std::max(two_pi / b, b / two_pi)).epsilon(1e-6));
      CHECK(frame_report(*o.model, o.cycle.samples, Q).max_ode_residual < 1e-9);
      const auto col = F.real_column(1);
      CHECK(col.arity() == 2);
      CHECK(std::abs(col(0, 0) - s * b) < 1e-9);
    }
  }
}

TEST_CASE("adjoint cross-check on the oracle") {
  const auto& o = oracle();
  const auto F = build_bundle_frame(*o.model, o.cycle, o.spectrum, Representation::complex);
  const auto Q = build_adjoint_frame(F);
  const auto x = cross_check_adjoint_frame(*o.model, o.cycle, o.spectrum, F, Q, 16);
  REQUIRE(x.psi_multipliers.size() == 2);
  // e^{-conj(lambda) T}: 1 and e^{4 pi}
  CHECK(x.max_multiplier_error < 1e-8);
  CHECK(std::abs(x.expected_multipliers[1] - std::exp(4 * M_PI)) < 1e-6 * std::exp(4 * M_PI));
  for (double e : x.column_relative_error) CHECK(e < 1e-8);
}

TEST_CASE("singular frames are rejected") {
  Frame f;
  f.classes = {FloquetClass::trivial, FloquetClass::real_positive};
  f.values.assign(4, Eigen::MatrixXcd::Ones(2, 2));
  f.generator = Eigen::MatrixXcd::Zero(2, 2);
  CHECK_THROWS_AS(build_adjoint_frame(f), NumericalError);
}

TEST_CASE("E-I real frames: period 2 and the negative-multiplier relation") {
  const auto model = make_model("ei");
  CycleSettings cs;
  cs.grid_N = 1024;
  const auto cycle = find_cycle(*model, cs);
  FloquetSettings fs;
  fs.segments = 32;
  const auto sp = floquet_spectrum(*model, cycle, fs);
  const auto Fc = build_bundle_frame(*model, cycle, sp, Representation::complex);
  const auto Fr = build_bundle_frame(*model, cycle, sp, Representation::real);
  const auto Qr = build_adjoint_frame(Fr);
  CHECK(Fc.period == 1);
  CHECK(Fr.period == 2);
  CHECK(Fr.points() == 2048);
  for (std::size_t j = 0; j < 6; ++j) {
    if (Fr.classes[j] == FloquetClass::real_negative) {
      CHECK(antiperiodicity_error(Fr, j) < 1e-9);
      CHECK(antiperiodicity_error(Qr, j) / grid_max_norm(Qr.column(j)) < 1e-12);
      CHECK(negative_bundle_relation_error(Fc, Fr, j) < 1e-9);
    } else {
      // the other columns are 1-periodic: f(theta + 1) = f(theta)
      double e = 0.0;
      for (std::size_t m = 0; m < 1024; ++m) e = std::max(e, std::abs(Fr.values[m](0, j) - Fr.values[m + 1024](0, j)));
      CHECK(e < 1e-9);
    }
  }
  // complex pairs become 2x2 rotation blocks in the real generator
  CHECK(std::abs(Fr.generator(2, 3) + Fr.generator(3, 2)) < 1e-12);
  CHECK(std::abs(Fr.generator(2, 3)) > 0.01);
  CHECK(biorthogonality_error(Fr, Qr) < 1e-10);
}
