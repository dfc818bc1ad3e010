#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "realnav/observation.hpp"
#include "realnav/simd/retrieval_kernels.hpp"

namespace realnav {

struct RetrievalConfig {
  /// Minimum heading cosine of a candidate image; [-1, 1].
  double cos_threshold = 0.96;
  /// Angular buckets of the heading table.
  int heading_bins = 72;
  /// Records per kd-tree leaf (scanned by the SIMD kernel).
  int leaf_size = 16;
  /// Kernel variant; null selects simd::active_kernels().
  const simd::RetrievalKernels* kernels = nullptr;

  void validate() const;
};

struct RetrievalResult {
  const ObservationRecord* record = nullptr;
  /// True when no image passed the heading filter and the best-aligned
  /// headings were used instead.
  bool fallback = false;
  double xz_distance = 0.0;
  double cosine = 0.0;
};

/// Two-step nearest-pose index: heading filter by cosine threshold, then the
/// XZ-nearest survivor (ties by lowest id). Immutable after construction and
/// safe to query concurrently.
///
/// Records are bucketed by heading angle; each bucket holds a kd-tree over
/// (x, z). A query visits only the buckets that can contain headings within
/// the threshold and applies the exact cosine test at the leaves.
class RetrievalIndex {
 public:
  /// Throws kEmptyDatabase for no records, kValidation for duplicate ids.
  RetrievalIndex(std::vector<ObservationRecord> records, RetrievalConfig config = {});

  RetrievalResult retrieve(const Pose3& query) const;
  /// Elementwise equal to retrieve(); runs on up to `jobs` threads.
  std::vector<RetrievalResult> retrieve_batch(std::span<const Pose3> queries,
                                              int jobs = 0) const;

  std::size_t size() const noexcept { return records_.size(); }
  std::span<const ObservationRecord> records() const noexcept { return records_; }
  const RetrievalConfig& config() const noexcept { return config_; }
  const simd::RetrievalKernels& kernels() const noexcept { return *kernels_; }

 private:
  struct Node {
    double min_x, max_x, min_z, max_z;
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build_node(std::vector<std::size_t>& order, std::size_t begin,
                          std::size_t end);
  void search(std::int32_t node, const simd::ScanQuery& q,
              simd::ScanBest& best) const;
  int bin_of_angle(double angle) const;
  simd::RecordColumns columns() const noexcept;

  std::vector<ObservationRecord> records_;
  RetrievalConfig config_;
  const simd::RetrievalKernels* kernels_;

  // Columns in bucket/kd-tree order; slot_record_[slot] maps back to records_.
  std::vector<double> x_, z_, u_, v_;
  std::vector<std::int64_t> id_;
  std::vector<std::size_t> slot_record_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> bin_root_;  // -1 for an empty bucket
};

inline RetrievalIndex build_index(std::vector<ObservationRecord> records,
                                  const RetrievalConfig& config = {}) {
  return RetrievalIndex(std::move(records), config);
}

inline RetrievalResult retrieve(const RetrievalIndex& index, const Pose3& query) {
  return index.retrieve(query);
}

}  // namespace realnav
