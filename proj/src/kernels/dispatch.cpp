#include <atomic>
#include <cstdlib>
#include <string>

#include "slowman/errors.hpp"
#include "slowman/kernels.hpp"

namespace slowman::kernels {
namespace {

struct Table {
  void (*mul_acc)(const double*, const double*, double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  void (*cmul_acc)(const cplx*, const cplx*, cplx*, std::size_t) noexcept;
  void (*cmul_acc_real)(const cplx*, const double*, cplx*, std::size_t) noexcept;
};

constexpr Table kScalar{scalar::mul_acc, scalar::axpy, scalar::cmul_acc, scalar::cmul_acc_real};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{avx2::mul_acc, avx2::axpy, avx2::cmul_acc, avx2::cmul_acc_real};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{neon::mul_acc, neon::axpy, neon::cmul_acc, neon::cmul_acc_real};
#endif

const Table& table_for(Isa isa) noexcept {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      return kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

Isa initial_isa() noexcept {
  // SLOWMAN_ISA=scalar|avx2|neon overrides detection (ignored if unsupported).
  if (const char* env = std::getenv("SLOWMAN_ISA")) {
    const std::string v(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (v == isa_name(isa) && isa_supported(isa)) return isa;
    }
  }
  return detect_isa();
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const Table& current() noexcept { return table_for(active().load(std::memory_order_relaxed)); }

void check_sizes(std::size_t a, std::size_t b, std::size_t out) {
  if (a != out || b != out) throw InvalidArgument("kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
    default:
      return "scalar";
  }
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() noexcept {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw InvalidArgument("instruction set '" + std::string(isa_name(isa)) + "' not supported here");
  }
  active().store(isa, std::memory_order_relaxed);
}

void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a.size(), b.size(), out.size());
  current().mul_acc(a.data(), b.data(), out.data(), out.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), y.size());
  current().axpy(alpha, x.data(), y.data(), y.size());
}

void cmul_acc(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  check_sizes(a.size(), b.size(), out.size());
  current().cmul_acc(a.data(), b.data(), out.data(), out.size());
}

void cmul_acc_real(std::span<const cplx> a, std::span<const double> b, std::span<cplx> out) {
  check_sizes(a.size(), b.size(), out.size());
  current().cmul_acc_real(a.data(), b.data(), out.data(), out.size());
}

}  // namespace slowman::kernels
