#pragma once
// Oracle model run through the expansions once per test binary. The oracle
// has K(theta, sigma) = (1 - 2 s sigma)^{-1/2} (cos, sin)(2 pi theta) with
// s = +-1 the sign of the slow bundle, Theta = atan2(y, x) / (2 pi) and
// Sigma = s (1 - |x|^{-2}) / 2.

#include "slowman/response.hpp"

namespace testing {

struct OracleRun {
  std::shared_ptr<const slowman::VectorFieldModel> model = slowman::make_model("oracle");
  slowman::Cycle cycle;
  slowman::FloquetSpectrum spectrum;
  slowman::Frame bundle, adjoint;
  slowman::ManifoldExpansion manifold;
  slowman::ResponseExpansion response;
  double sign = 1.0;

  explicit OracleRun(std::size_t L = 5, std::size_t N = 256) {
    using namespace slowman;
    CycleSettings cs;
    cs.grid_N = N;
    cycle = find_cycle(*model, cs);
    FloquetSettings fs;
    fs.segments = 16;
    spectrum = floquet_spectrum(*model, cycle, fs);
    bundle = build_bundle_frame(*model, cycle, spectrum, Representation::real);
    adjoint = build_adjoint_frame(bundle);
    ManifoldSettings ms;
    ms.order = L;
    manifold = expand_slow_manifold(*model, cycle, spectrum, bundle, adjoint, ms);
    ResponseSettings rs;
    rs.order = L;
    response = expand_response_functions(*model, manifold, bundle, adjoint, spectrum, rs);
    sign = manifold.K[1](0, 0) > 0 ? 1.0 : -1.0;
  }
};

inline const OracleRun& oracle_run() {
  static const OracleRun r;
  return r;
}

}  // namespace testing
