#include "slowman/kernels.hpp"

namespace slowman::kernels::scalar {

void mul_acc(const double* a, const double* b, double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void cmul_acc(const cplx* a, const cplx* b, cplx* out, std::size_t n) noexcept {
  // Written out so the result does not depend on the library's complex
  // multiplication (which adds inf/nan recovery branches).
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(out[i].real() + (ar * br - ai * bi), out[i].imag() + (ar * bi + ai * br));
  }
}

void cmul_acc_real(const cplx* a, const double* b, cplx* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = cplx(out[i].real() + a[i].real() * b[i], out[i].imag() + a[i].imag() * b[i]);
  }
}

}  // namespace slowman::kernels::scalar
