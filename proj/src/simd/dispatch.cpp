#include <atomic>
#include <cstdlib>

#include "paththresh/simd/kernels.hpp"

namespace paththresh::simd {

std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  return std::nullopt;
}

bool backend_available(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(PATHTHRESH_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(PATHTHRESH_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend b) noexcept {
  switch (b) {
#if defined(PATHTHRESH_HAVE_AVX2)
    case Backend::Avx2: return detail::kAvx2Table;
#endif
#if defined(PATHTHRESH_HAVE_NEON)
    case Backend::Neon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

namespace {

Backend detect() noexcept {
  if (const char* env = std::getenv("PATHTHRESH_KERNEL")) {
    if (auto b = parse_backend(env); b && backend_available(*b)) return *b;
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

struct State {
  std::atomic<Backend> backend{detect()};
  std::atomic<const KernelTable*> kernels{&table(backend.load())};
};

State& state() noexcept {
  static State s;
  return s;
}

}  // namespace

Backend active_backend() noexcept { return state().backend.load(std::memory_order_relaxed); }

bool set_backend(Backend b) noexcept {
  if (!backend_available(b)) return false;
  state().backend.store(b);
  state().kernels.store(&table(b));
  return true;
}

const KernelTable& active() noexcept {
  return *state().kernels.load(std::memory_order_relaxed);
}

}  // namespace paththresh::simd
