// Compiled with -mavx2 -mfma; only called after a runtime CPU check.
#include "slowman/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace slowman::kernels::avx2 {

void mul_acc(const double* a, const double* b, double* out, std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d o0 = _mm256_loadu_pd(out + i);
    __m256d o1 = _mm256_loadu_pd(out + i + 4);
    o0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), o0);
    o1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), o1);
    _mm256_storeu_pd(out + i, o0);
    _mm256_storeu_pd(out + i + 4, o1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d o = _mm256_loadu_pd(out + i);
    o = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), o);
    _mm256_storeu_pd(out + i, o);
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void cmul_acc(const cplx* a, const cplx* b, cplx* out, std::size_t n) noexcept {
  auto* pa = reinterpret_cast<const double*>(a);
  auto* pb = reinterpret_cast<const double*>(b);
  auto* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d b_re = _mm256_movedup_pd(vb);
    const __m256d b_im = _mm256_permute_pd(vb, 0xF);
    const __m256d a_swap = _mm256_permute_pd(va, 0x5);
    const __m256d prod = _mm256_fmaddsub_pd(va, b_re, _mm256_mul_pd(a_swap, b_im));
    _mm256_storeu_pd(po + 2 * i, _mm256_add_pd(_mm256_loadu_pd(po + 2 * i), prod));
  }
  if (i < n) scalar::cmul_acc(a + i, b + i, out + i, n - i);
}

void cmul_acc_real(const cplx* a, const double* b, cplx* out, std::size_t n) noexcept {
  auto* pa = reinterpret_cast<const double*>(a);
  auto* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vb = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(b + i)), 0x50);
    const __m256d o = _mm256_fmadd_pd(_mm256_loadu_pd(pa + 2 * i), vb, _mm256_loadu_pd(po + 2 * i));
    _mm256_storeu_pd(po + 2 * i, o);
  }
  if (i < n) scalar::cmul_acc_real(a + i, b + i, out + i, n - i);
}

}  // namespace slowman::kernels::avx2

#endif
