#include "paththresh/simd/kernels.hpp"

#if defined(PATHTHRESH_HAVE_NEON)

#include <arm_neon.h>

namespace paththresh::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t_neon(const double* A, std::size_t rows, std::size_t cols,
                 const double* v, double* out) {
  std::size_t j = 0;
  for (; j + 2 <= cols; j += 2) {
    const double* c0 = A + j * rows;
    const double* c1 = c0 + rows;
    float64x2_t s0 = vdupq_n_f64(0.0);
    float64x2_t s1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= rows; i += 2) {
      const float64x2_t vv = vld1q_f64(v + i);
      s0 = vfmaq_f64(s0, vld1q_f64(c0 + i), vv);
      s1 = vfmaq_f64(s1, vld1q_f64(c1 + i), vv);
    }
    double r0 = vaddvq_f64(s0), r1 = vaddvq_f64(s1);
    for (; i < rows; ++i) {
      r0 += c0[i] * v[i];
      r1 += c1[i] * v[i];
    }
    out[j] = r0;
    out[j + 1] = r1;
  }
  for (; j < cols; ++j) out[j] = dot_neon(A + j * rows, v, rows);
}

void gemv_n_sub_neon(const double* A, std::size_t rows, std::size_t cols,
                     const double* h, double* y) {
  for (std::size_t j = 0; j < cols; ++j) axpy_neon(-h[j], A + j * rows, y, rows);
}

}  // namespace

const KernelTable kNeonTable{
    dot_neon, sum_squares_neon, axpy_neon, gemv_t_neon, gemv_n_sub_neon,
};

}  // namespace paththresh::simd::detail

#endif  // PATHTHRESH_HAVE_NEON
