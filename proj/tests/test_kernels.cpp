#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "slowman/kernels.hpp"

using namespace slowman;
namespace k = slowman::kernels;

namespace {

std::vector<k::Isa> simd_variants() {
  std::vector<k::Isa> out;
  for (k::Isa isa : {k::Isa::avx2, k::Isa::neon}) {
    if (k::isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

std::vector<cplx> random_complex(std::size_t n, std::uint64_t seed) {
  const auto re = testing::random_vector(n, seed), im = testing::random_vector(n, seed + 1000);
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {re[i], im[i]};
  return v;
}

// a fused multiply-add may differ from the reference by one rounding per term
constexpr double tol = 4e-16;

}  // namespace

TEST_CASE("scalar reference against plain loops") {
  for (std::size_t n : {0u, 1u, 5u, 33u}) {
    const auto a = testing::random_vector(n, 1), b = testing::random_vector(n, 2);
    auto out = testing::random_vector(n, 3);
    auto ref = out;
    for (std::size_t i = 0; i < n; ++i) ref[i] += a[i] * b[i];
    k::scalar::mul_acc(a.data(), b.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == ref[i]);
  }
}

TEST_CASE("simd variants match the scalar reference") {
  const auto variants = simd_variants();
  if (variants.empty()) MESSAGE("no SIMD variant on this CPU; only the scalar path is exercised");
  for (k::Isa isa : variants) {
    CAPTURE(k::isa_name(isa));
    k::ScopedIsa pin(isa);
    CHECK(k::active_isa() == isa);
    // lengths around the vector width exercise the remainder loops
    for (std::size_t n = 0; n <= 37; ++n) {
      const auto a = testing::random_vector(n, 10 + n), b = testing::random_vector(n, 50 + n);
      const auto init = testing::random_vector(n, 90 + n);

      auto ref = init, got = init;
      k::scalar::mul_acc(a.data(), b.data(), ref.data(), n);
      k::mul_acc(a, b, got);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - ref[i]) <= tol * (1 + std::abs(ref[i])));

      ref = init;
      got = init;
      k::scalar::axpy(0.37, a.data(), ref.data(), n);
      k::axpy(0.37, a, got);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - ref[i]) <= tol * (1 + std::abs(ref[i])));

      const auto ca = random_complex(n, 200 + n), cb = random_complex(n, 300 + n), cinit = random_complex(n, 400 + n);
      auto cref = cinit, cgot = cinit;
      k::scalar::cmul_acc(ca.data(), cb.data(), cref.data(), n);
      k::cmul_acc(ca, cb, cgot);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(cgot[i] - cref[i]) <= 2 * tol * (1 + std::abs(cref[i])));

      cref = cinit;
      cgot = cinit;
      k::scalar::cmul_acc_real(ca.data(), b.data(), cref.data(), n);
      k::cmul_acc_real(ca, b, cgot);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(cgot[i] - cref[i]) <= tol * (1 + std::abs(cref[i])));
    }
  }
}

TEST_CASE("dispatch bookkeeping") {
  CHECK(k::isa_supported(k::Isa::scalar));
  CHECK(k::isa_supported(k::detect_isa()));
  {
    k::ScopedIsa pin(k::Isa::scalar);
    CHECK(k::active_isa() == k::Isa::scalar);
  }
  for (k::Isa isa : {k::Isa::avx2, k::Isa::neon}) {
    if (!k::isa_supported(isa)) CHECK_THROWS_AS(k::set_isa(isa), InvalidArgument);
  }
  std::vector<double> a(3), out(4);
  CHECK_THROWS_AS(k::mul_acc(a, a, out), InvalidArgument);
}
