// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "realnav/simd/retrieval_kernels.hpp"

namespace realnav::simd::detail {

void scan_two_step_avx2(const RecordColumns& cols, const ScanQuery& q,
                        std::size_t base, ScanBest& best) {
  const std::size_t n = cols.size;
  std::size_t i = 0;
  if (n >= 4) {
    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qz = _mm256_set1_pd(q.z);
    const __m256d qu = _mm256_set1_pd(q.u);
    const __m256d qv = _mm256_set1_pd(q.v);
    const __m256d thr = _mm256_set1_pd(q.cos_threshold);
    __m256d lane_d2 = _mm256_set1_pd(best.dist2);
    __m256i lane_id = _mm256_set1_epi64x(best.id);
    __m256i lane_idx = _mm256_set1_epi64x(static_cast<long long>(best.index));
    __m256i idx = _mm256_setr_epi64x(
        static_cast<long long>(base), static_cast<long long>(base + 1),
        static_cast<long long>(base + 2), static_cast<long long>(base + 3));
    const __m256i four = _mm256_set1_epi64x(4);

    for (; i + 4 <= n; i += 4) {
      const __m256d u = _mm256_loadu_pd(cols.u + i);
      const __m256d v = _mm256_loadu_pd(cols.v + i);
      const __m256d cosine =
          _mm256_add_pd(_mm256_mul_pd(u, qu), _mm256_mul_pd(v, qv));
      const __m256d pass = _mm256_cmp_pd(cosine, thr, _CMP_GE_OQ);

      const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(cols.x + i), qx);
      const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(cols.z + i), qz);
      const __m256d d2 =
          _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dz, dz));
      const __m256i id = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(cols.id + i));

      const __m256d closer = _mm256_cmp_pd(d2, lane_d2, _CMP_LT_OQ);
      const __m256d tie = _mm256_cmp_pd(d2, lane_d2, _CMP_EQ_OQ);
      const __m256d lower_id =
          _mm256_castsi256_pd(_mm256_cmpgt_epi64(lane_id, id));
      const __m256d better = _mm256_and_pd(
          pass, _mm256_or_pd(closer, _mm256_and_pd(tie, lower_id)));

      lane_d2 = _mm256_blendv_pd(lane_d2, d2, better);
      lane_id = _mm256_castpd_si256(_mm256_blendv_pd(
          _mm256_castsi256_pd(lane_id), _mm256_castsi256_pd(id), better));
      lane_idx = _mm256_castpd_si256(_mm256_blendv_pd(
          _mm256_castsi256_pd(lane_idx), _mm256_castsi256_pd(idx), better));
      idx = _mm256_add_epi64(idx, four);
    }

    alignas(32) double d2s[4];
    alignas(32) long long ids[4];
    alignas(32) long long idxs[4];
    _mm256_store_pd(d2s, lane_d2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(ids), lane_id);
    _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), lane_idx);
    for (int lane = 0; lane < 4; ++lane) {
      if (d2s[lane] < best.dist2 ||
          (d2s[lane] == best.dist2 && ids[lane] < best.id)) {
        best.dist2 = d2s[lane];
        best.id = ids[lane];
        best.index = static_cast<std::size_t>(idxs[lane]);
      }
    }
  }
  if (i < n) scan_two_step_scalar(cols.slice(i, n), q, base + i, best);
}

double max_cosine_avx2(const RecordColumns& cols, double qu_s, double qv_s) {
  const std::size_t n = cols.size;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    const __m256d qu = _mm256_set1_pd(qu_s);
    const __m256d qv = _mm256_set1_pd(qv_s);
    __m256d acc = _mm256_set1_pd(best);
    for (; i + 4 <= n; i += 4) {
      const __m256d cosine =
          _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(cols.u + i), qu),
                        _mm256_mul_pd(_mm256_loadu_pd(cols.v + i), qv));
      acc = _mm256_max_pd(acc, cosine);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (double c : lanes) best = c > best ? c : best;
  }
  for (; i < n; ++i) {
    const double cosine = cols.u[i] * qu_s + cols.v[i] * qv_s;
    if (cosine > best) best = cosine;
  }
  return best;
}

}  // namespace realnav::simd::detail
