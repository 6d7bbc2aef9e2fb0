#pragma once

// Pointwise grid kernels used by the jet arithmetic and the frame products.
// Each kernel has a scalar reference implementation plus SIMD variants; the
// active variant is picked once at startup from the CPU features and can be
// overridden (tests pin it to compare variants against the reference).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace slowman::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
/// Best variant supported by this CPU.
Isa detect_isa() noexcept;
Isa active_isa() noexcept;
/// Throws InvalidArgument if the CPU cannot run `isa`.
void set_isa(Isa isa);

/// Pins the active variant for the lifetime of the object.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_isa(isa); }
  ~ScopedIsa() { set_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// out[i] += a[i] * b[i]
void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> out);
// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// out[i] += a[i] * b[i]   (complex)
void cmul_acc(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
// out[i] += a[i] * b[i]   (complex times real)
void cmul_acc_real(std::span<const cplx> a, std::span<const double> b, std::span<cplx> out);

// Raw variants. Pointers may alias only when identical; n is the element count.
namespace scalar {
void mul_acc(const double* a, const double* b, double* out, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void cmul_acc(const cplx* a, const cplx* b, cplx* out, std::size_t n) noexcept;
void cmul_acc_real(const cplx* a, const double* b, cplx* out, std::size_t n) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void mul_acc(const double* a, const double* b, double* out, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void cmul_acc(const cplx* a, const cplx* b, cplx* out, std::size_t n) noexcept;
void cmul_acc_real(const cplx* a, const double* b, cplx* out, std::size_t n) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void mul_acc(const double* a, const double* b, double* out, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void cmul_acc(const cplx* a, const cplx* b, cplx* out, std::size_t n) noexcept;
void cmul_acc_real(const cplx* a, const double* b, cplx* out, std::size_t n) noexcept;
}  // namespace neon
#endif

}  // namespace slowman::kernels
