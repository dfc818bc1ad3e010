#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "realnav/error.hpp"
#include "realnav/retrieval.hpp"
#include "realnav/simd/retrieval_kernels.hpp"
#include "test_support.hpp"

using namespace realnav;
using testing_support::brute_force_retrieve;
using testing_support::random_records;

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

Pose3 random_query(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> coord(-0.1 * extent, 1.1 * extent);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  return {coord(rng), coord(rng), Heading::from_angle(angle(rng))};
}

std::vector<const simd::RetrievalKernels*> all_kernels() {
  std::vector<const simd::RetrievalKernels*> out{&simd::scalar_kernels()};
  if (simd::avx2_kernels()) out.push_back(simd::avx2_kernels());
  return out;
}

}  // namespace

TEST(Retrieval, SingleRecord) {
  const std::vector<ObservationRecord> db{{42, "only.jpg", {1.0, 2.0, Heading::from_angle(0.5)}}};
  const RetrievalIndex index(db);
  EXPECT_EQ(index.size(), 1u);
  std::mt19937_64 rng(30);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(index.retrieve(random_query(rng, 5.0)).record->id, 42);
  }
}

TEST(Retrieval, AngleFilterBeforeDistance) {
  const Heading query_heading = Heading::from_angle(0.2);
  const std::vector<ObservationRecord> db{
      {1, "A", {0.1, 0.0, query_heading.rotated(deg(90))}},
      {2, "B", {1.0, 0.0, query_heading}}};
  const RetrievalIndex index(db);
  const auto r = index.retrieve({0.0, 0.0, query_heading});
  EXPECT_EQ(r.record->id, 2);
  EXPECT_FALSE(r.fallback);
  EXPECT_NEAR(r.xz_distance, 1.0, 1e-12);
}

TEST(Retrieval, ThresholdIsInclusive) {
  // cos(16 deg) ~ 0.9613 passes, cos(17 deg) ~ 0.9563 fails.
  const std::vector<ObservationRecord> db{{1, "near", {0.0, 0.0, Heading::from_angle(deg(17))}},
                                          {2, "far", {3.0, 0.0, Heading::from_angle(deg(16))}}};
  const RetrievalIndex index(db);
  EXPECT_EQ(index.retrieve({0.0, 0.0, Heading::from_angle(0.0)}).record->id, 2);

  const Heading h = Heading::from_angle(0.3);
  RetrievalConfig exact;
  exact.cos_threshold = heading_cosine(h, h.rotated(0.25));
  const std::vector<ObservationRecord> edge{{7, "edge", {0.0, 0.0, h.rotated(0.25)}},
                                            {8, "other", {5.0, 5.0, h}}};
  EXPECT_EQ(RetrievalIndex(edge, exact).retrieve({0.0, 0.0, h}).record->id, 7);
}

TEST(Retrieval, TieBreakLowestId) {
  const Heading h = Heading::from_angle(1.0);
  const std::vector<ObservationRecord> db{{9, "a", {1.0, 0.0, h}},
                                          {3, "b", {-1.0, 0.0, h}},
                                          {5, "c", {0.0, 1.0, h}}};
  EXPECT_EQ(RetrievalIndex(db).retrieve({0.0, 0.0, h}).record->id, 3);
}

TEST(Retrieval, FallbackUsesBestAlignedHeadings) {
  const std::vector<ObservationRecord> db{
      {1, "a", {0.0, 0.0, Heading::from_angle(deg(90))}},
      {2, "b", {5.0, 0.0, Heading::from_angle(deg(60))}},
      {3, "c", {9.0, 0.0, Heading::from_angle(deg(60))}}};
  const auto r = RetrievalIndex(db).retrieve({0.0, 0.0, Heading::from_angle(0.0)});
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.record->id, 2);
}

TEST(Retrieval, Errors) {
  try {
    RetrievalIndex({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDatabase);
  }
  const std::vector<ObservationRecord> dup{{1, "a", {}}, {1, "b", {1.0, 1.0, Heading()}}};
  try {
    RetrievalIndex{dup};
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
  std::mt19937_64 rng(1);
  const auto db = random_records(rng, 10, 1.0, false);
  RetrievalConfig bad;
  bad.cos_threshold = 1.5;
  EXPECT_THROW(RetrievalIndex(db, bad), Error);
  Pose3 nan_pose;
  nan_pose.x = std::nan("");
  EXPECT_THROW(RetrievalIndex({{1, "a", nan_pose}}), Error);
}

class RetrievalOracle : public ::testing::TestWithParam<std::tuple<std::size_t, bool, double>> {};

TEST_P(RetrievalOracle, MatchesBruteForce) {
  const auto [n, quantize, threshold] = GetParam();
  std::mt19937_64 rng(31 + n + (quantize ? 1 : 0));
  const double extent = 20.0;
  const auto db = random_records(rng, n, extent, quantize);
  for (const auto* kernels : all_kernels()) {
    RetrievalConfig cfg;
    cfg.cos_threshold = threshold;
    cfg.kernels = kernels;
    const RetrievalIndex index(db, cfg);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int i = 0; i < 1000; ++i) {
      Pose3 q = random_query(rng, extent);
      // Queries sitting exactly on records produce zero-distance and
      // equal-cosine ties.
      if (quantize && i % 3 == 0) q = db[pick(rng)].pose;
      const auto expect = brute_force_retrieve(db, q, threshold);
      const auto got = index.retrieve(q);
      ASSERT_EQ(got.record->id, expect.id) << kernels->name << " query " << i;
      ASSERT_EQ(got.fallback, expect.fallback);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    Databases, RetrievalOracle,
    ::testing::Values(std::make_tuple(std::size_t{1}, false, 0.96),
                      std::make_tuple(std::size_t{7}, false, 0.96),
                      std::make_tuple(std::size_t{100}, false, 0.96),
                      std::make_tuple(std::size_t{10000}, false, 0.96),
                      std::make_tuple(std::size_t{10000}, true, 0.96),
                      std::make_tuple(std::size_t{3000}, true, std::cos(std::numbers::pi / 36)),
                      std::make_tuple(std::size_t{2000}, false, 0.999),
                      std::make_tuple(std::size_t{2000}, false, -1.0),
                      std::make_tuple(std::size_t{2000}, false, 0.0)));

TEST(Retrieval, BatchEqualsSingle) {
  std::mt19937_64 rng(32);
  const auto db = random_records(rng, 5000, 10.0, false);
  const RetrievalIndex index(db);
  std::vector<Pose3> queries;
  for (int i = 0; i < 2000; ++i) queries.push_back(random_query(rng, 10.0));
  for (int jobs : {1, 3, 8}) {
    const auto batch = index.retrieve_batch(queries, jobs);
    ASSERT_EQ(batch.size(), queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      ASSERT_EQ(batch[i].record, index.retrieve(queries[i]).record);
    }
  }
}

TEST(Retrieval, DeterministicAcrossBuilds) {
  std::mt19937_64 rng(33);
  const auto db = random_records(rng, 3000, 10.0, true);
  const RetrievalIndex a(db);
  const RetrievalIndex b(db);
  for (int i = 0; i < 500; ++i) {
    const Pose3 q = random_query(rng, 10.0);
    EXPECT_EQ(a.retrieve(q).record->id, b.retrieve(q).record->id);
  }
}

TEST(Retrieval, IndexIsMuchFasterThanExhaustiveScan) {
  // Performance guard: mean query time at least 10x below the exhaustive
  // two-step scan on 1e5 records.
  std::mt19937_64 rng(34);
  const auto db = random_records(rng, 100000, 100.0, false);
  const RetrievalIndex index(db);
  std::vector<Pose3> queries;
  for (int i = 0; i < 20000; ++i) queries.push_back(random_query(rng, 100.0));

  using Clock = std::chrono::steady_clock;
  std::int64_t sink = 0;
  auto t0 = Clock::now();
  for (const auto& q : queries) sink += index.retrieve(q).record->id;
  const double indexed = std::chrono::duration<double>(Clock::now() - t0).count() /
                         static_cast<double>(queries.size());
  const std::size_t brute_n = 200;
  t0 = Clock::now();
  for (std::size_t i = 0; i < brute_n; ++i) {
    sink += brute_force_retrieve(db, queries[i], 0.96).id;
  }
  const double brute = std::chrono::duration<double>(Clock::now() - t0).count() /
                       static_cast<double>(brute_n);
  EXPECT_NE(sink, 0);
  EXPECT_GE(brute / indexed, 10.0) << "indexed " << indexed * 1e6 << " us, brute "
                                   << brute * 1e6 << " us";
}

TEST(RetrievalKernels, VariantsAgreeBitForBit) {
  const auto* avx2 = simd::avx2_kernels();
  if (!avx2) GTEST_SKIP() << "AVX2 kernels unavailable on this machine";
  const auto& scalar = simd::scalar_kernels();
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_int_distribution<int> small(0, 4);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(trial % 37);
    std::vector<double> x(n), z(n), u(n), v(n);
    std::vector<std::int64_t> id(n);
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = coarse ? small(rng) : coord(rng);
      z[i] = coarse ? small(rng) : coord(rng);
      const Heading h = Heading::from_angle(coarse ? small(rng) * 0.25 : angle(rng));
      u[i] = h.u();
      v[i] = h.v();
      id[i] = static_cast<std::int64_t>((i * 13) % 37);  // unique for n < 37
    }
    const simd::RecordColumns cols{x.data(), z.data(), u.data(), v.data(), id.data(), n};
    const Heading qh = Heading::from_angle(coarse ? small(rng) * 0.25 : angle(rng));
    const simd::ScanQuery q{coarse ? 1.0 : coord(rng), coarse ? 2.0 : coord(rng), qh.u(), qh.v(),
                            trial % 3 == 0 ? -1.0 : 0.9};
    simd::ScanBest a, b;
    scalar.scan_two_step(cols, q, 100, a);
    avx2->scan_two_step(cols, q, 100, b);
    ASSERT_EQ(a.index, b.index) << "trial " << trial;
    ASSERT_EQ(a.id, b.id);
    ASSERT_EQ(a.dist2, b.dist2);
    const double ma = scalar.max_cosine(cols, q.u, q.v);
    const double mb = avx2->max_cosine(cols, q.u, q.v);
    ASSERT_EQ(ma, mb);
  }
}

TEST(RetrievalKernels, ScalarMatchesDefinition) {
  std::vector<double> x{0.0, 1.0, 1.0}, z{0.0, 0.0, 0.0}, u{0.0, 1.0, 1.0}, v{1.0, 0.0, 0.0};
  std::vector<std::int64_t> id{1, 9, 4};
  const simd::RecordColumns cols{x.data(), z.data(), u.data(), v.data(), id.data(), 3};
  simd::ScanBest best;
  simd::scalar_kernels().scan_two_step(cols, {0.0, 0.0, 1.0, 0.0, 0.96}, 0, best);
  EXPECT_EQ(best.id, 4);
  EXPECT_EQ(best.index, 2u);
  EXPECT_EQ(best.dist2, 1.0);
  EXPECT_EQ(simd::scalar_kernels().max_cosine(cols, 0.0, -1.0), 0.0);
}
