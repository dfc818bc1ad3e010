#pragma once

// Data-parallel inner loops of the two-step pose retrieval. Every kernel has a
// scalar reference and optional SIMD variants; all variants return identical
// results (cosines and squared distances are evaluated with the same
// operation order, without FMA contraction).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

namespace realnav::simd {

/// Structure-of-arrays view over a contiguous run of records.
struct RecordColumns {
  const double* x = nullptr;
  const double* z = nullptr;
  const double* u = nullptr;
  const double* v = nullptr;
  const std::int64_t* id = nullptr;
  std::size_t size = 0;

  RecordColumns slice(std::size_t begin, std::size_t end) const noexcept {
    return {x + begin, z + begin, u + begin, v + begin, id + begin, end - begin};
  }
};

struct ScanQuery {
  double x = 0.0;
  double z = 0.0;
  double u = 1.0;
  double v = 0.0;
  double cos_threshold = -1.0;
};

/// Running best candidate, ordered by (dist2, id).
struct ScanBest {
  double dist2 = std::numeric_limits<double>::infinity();
  std::int64_t id = std::numeric_limits<std::int64_t>::max();
  /// Position in the scanned columns' base (offset added by the caller).
  std::size_t index = std::numeric_limits<std::size_t>::max();

  bool found() const noexcept {
    return index != std::numeric_limits<std::size_t>::max();
  }
  bool improves_on(double d2, std::int64_t other_id) const noexcept {
    return dist2 < d2 || (dist2 == d2 && id < other_id);
  }
};

/// Kernel table for one instruction set.
struct RetrievalKernels {
  std::string_view name;
  /// Folds into `best` every record with cos >= cos_threshold, minimizing
  /// squared XZ distance, ties by lowest id. `base` is added to indices.
  void (*scan_two_step)(const RecordColumns& cols, const ScanQuery& q,
                        std::size_t base, ScanBest& best);
  /// Maximum heading cosine over all records (-inf when empty).
  double (*max_cosine)(const RecordColumns& cols, double qu, double qv);
};

const RetrievalKernels& scalar_kernels() noexcept;
/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const RetrievalKernels* avx2_kernels() noexcept;
/// Best available variant; `REALNAV_SIMD=scalar` in the environment forces
/// the scalar reference.
const RetrievalKernels& active_kernels() noexcept;

namespace detail {
void scan_two_step_scalar(const RecordColumns& cols, const ScanQuery& q,
                          std::size_t base, ScanBest& best);
double max_cosine_scalar(const RecordColumns& cols, double qu, double qv);
#if defined(REALNAV_HAVE_AVX2)
void scan_two_step_avx2(const RecordColumns& cols, const ScanQuery& q,
                        std::size_t base, ScanBest& best);
double max_cosine_avx2(const RecordColumns& cols, double qu, double qv);
#endif
}  // namespace detail

}  // namespace realnav::simd
