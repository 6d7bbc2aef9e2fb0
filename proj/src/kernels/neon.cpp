#include "slowman/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace slowman::kernels::neon {

void mul_acc(const double* a, const double* b, double* out, std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void cmul_acc(const cplx* a, const cplx* b, cplx* out, std::size_t n) noexcept {
  auto* pa = reinterpret_cast<const double*>(a);
  auto* pb = reinterpret_cast<const double*>(b);
  auto* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) {
    // one complex number per 128-bit register: (re, im)
    const float64x2_t va = vld1q_f64(pa + 2 * i);
    const float64x2_t vb = vld1q_f64(pb + 2 * i);
    const float64x2_t b_re = vdupq_laneq_f64(vb, 0);
    const float64x2_t b_im = vdupq_laneq_f64(vb, 1);
    const float64x2_t a_swap = vextq_f64(va, va, 1);  // (im, re)
    const float64x2_t sign = {-1.0, 1.0};
    float64x2_t acc = vfmaq_f64(vld1q_f64(po + 2 * i), va, b_re);
    acc = vfmaq_f64(acc, vmulq_f64(a_swap, sign), b_im);
    vst1q_f64(po + 2 * i, acc);
  }
}

void cmul_acc_real(const cplx* a, const double* b, cplx* out, std::size_t n) noexcept {
  auto* pa = reinterpret_cast<const double*>(a);
  auto* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) {
    vst1q_f64(po + 2 * i, vfmaq_f64(vld1q_f64(po + 2 * i), vld1q_f64(pa + 2 * i), vdupq_n_f64(b[i])));
  }
}

}  // namespace slowman::kernels::neon

#endif
