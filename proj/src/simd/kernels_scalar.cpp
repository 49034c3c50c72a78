// Scalar reference kernels. These define the semantics the vectorized
// variants are tested against; keep them plain sequential loops.

#include "paththresh/simd/kernels.hpp"

namespace paththresh::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t_scalar(const double* A, std::size_t rows, std::size_t cols,
                   const double* v, double* out) {
  for (std::size_t j = 0; j < cols; ++j) out[j] = dot_scalar(A + j * rows, v, rows);
}

void gemv_n_sub_scalar(const double* A, std::size_t rows, std::size_t cols,
                       const double* h, double* y) {
  for (std::size_t j = 0; j < cols; ++j) axpy_scalar(-h[j], A + j * rows, y, rows);
}

}  // namespace

const KernelTable kScalarTable{
    dot_scalar, sum_squares_scalar, axpy_scalar, gemv_t_scalar, gemv_n_sub_scalar,
};

}  // namespace paththresh::simd::detail
