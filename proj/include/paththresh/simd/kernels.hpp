#pragma once

// Data-parallel inner loops shared by every solver. Each kernel exists as a
// scalar reference implementation plus vectorized variants (AVX2+FMA on
// x86-64, NEON on AArch64). The active variant is chosen once at startup from
// the CPU's capabilities and can be overridden with the environment variable
// PATHTHRESH_KERNEL=scalar|avx2|neon or set_backend().

#include <cstddef>
#include <optional>
#include <string_view>

namespace paththresh::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b) noexcept;
std::optional<Backend> parse_backend(std::string_view name) noexcept;

/// Backends compiled into this binary and supported by the running CPU.
bool backend_available(Backend b) noexcept;

Backend active_backend() noexcept;

/// Switches the process-wide backend. Returns false (and leaves the backend
/// unchanged) when `b` is not available. Not thread-safe with respect to
/// concurrently running kernels; call it before starting work.
bool set_backend(Backend b) noexcept;

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[j] = sum_i A(i, j) * v[i] for a column-major rows x cols matrix A.
  void (*gemv_t)(const double* A, std::size_t rows, std::size_t cols,
                 const double* v, double* out);
  // y -= A * h for a column-major rows x cols matrix A.
  void (*gemv_n_sub)(const double* A, std::size_t rows, std::size_t cols,
                     const double* h, double* y);
};

const KernelTable& table(Backend b) noexcept;
const KernelTable& active() noexcept;

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double sum_squares(const double* a, std::size_t n) {
  return active().sum_squares(a, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemv_t(const double* A, std::size_t rows, std::size_t cols,
                   const double* v, double* out) {
  active().gemv_t(A, rows, cols, v, out);
}
inline void gemv_n_sub(const double* A, std::size_t rows, std::size_t cols,
                       const double* h, double* y) {
  active().gemv_n_sub(A, rows, cols, h, y);
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(PATHTHRESH_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(PATHTHRESH_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace paththresh::simd
