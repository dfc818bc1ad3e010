#include "realnav/simd/retrieval_kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace realnav::simd {
namespace detail {

void scan_two_step_scalar(const RecordColumns& cols, const ScanQuery& q,
                          std::size_t base, ScanBest& best) {
  for (std::size_t i = 0; i < cols.size; ++i) {
    const double cosine = cols.u[i] * q.u + cols.v[i] * q.v;
    if (!(cosine >= q.cos_threshold)) continue;
    const double dx = cols.x[i] - q.x;
    const double dz = cols.z[i] - q.z;
    const double d2 = dx * dx + dz * dz;
    if (d2 < best.dist2 || (d2 == best.dist2 && cols.id[i] < best.id)) {
      best.dist2 = d2;
      best.id = cols.id[i];
      best.index = base + i;
    }
  }
}

double max_cosine_scalar(const RecordColumns& cols, double qu, double qv) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cols.size; ++i) {
    const double cosine = cols.u[i] * qu + cols.v[i] * qv;
    if (cosine > best) best = cosine;
  }
  return best;
}

}  // namespace detail

const RetrievalKernels& scalar_kernels() noexcept {
  static const RetrievalKernels k{"scalar", &detail::scan_two_step_scalar,
                                  &detail::max_cosine_scalar};
  return k;
}

const RetrievalKernels* avx2_kernels() noexcept {
#if defined(REALNAV_HAVE_AVX2)
  static const RetrievalKernels k{"avx2", &detail::scan_two_step_avx2,
                                  &detail::max_cosine_avx2};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &k : nullptr;
#else
  return nullptr;
#endif
}

const RetrievalKernels& active_kernels() noexcept {
  static const RetrievalKernels* chosen = [] {
    const char* force = std::getenv("REALNAV_SIMD");
    if (force != nullptr && std::strcmp(force, "scalar") == 0) {
      return &scalar_kernels();
    }
    if (const RetrievalKernels* k = avx2_kernels()) return k;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace realnav::simd
