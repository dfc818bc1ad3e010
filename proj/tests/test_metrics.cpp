#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "realnav/error.hpp"
#include "realnav/metrics.hpp"

using namespace realnav;

namespace {

std::vector<EpisodeResult> random_results(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> len(0.1, 20.0);
  std::uniform_real_distribution<double> stretch(0.0, 3.0);
  std::uniform_real_distribution<double> dist(0.0, 12.0);
  std::bernoulli_distribution ok(0.6);
  std::vector<EpisodeResult> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = len(rng);
    out.push_back({ok(rng), l, l * stretch(rng), dist(rng)});
  }
  return out;
}

}  // namespace

TEST(Spl, FormulaExamples) {
  const std::vector<EpisodeResult> one_success{{true, 4.0, 4.0, 0.1}};
  EXPECT_EQ(spl(one_success), 1.0);
  const std::vector<EpisodeResult> one_failure{{false, 4.0, 1.0, 3.0}};
  EXPECT_EQ(spl(one_failure), 0.0);
  const std::vector<EpisodeResult> pair{{true, 2.0, 4.0, 0.1}, {false, 3.0, 3.0, 2.0}};
  EXPECT_EQ(spl(pair), 0.25);
  // Paths shorter than the reference are capped at 1.
  const std::vector<EpisodeResult> shortcut{{true, 4.0, 3.0, 0.1}};
  EXPECT_EQ(spl(shortcut), 1.0);
}

TEST(Spl, InvalidResults) {
  for (double l : {0.0, -1.0}) {
    const std::vector<EpisodeResult> bad{{true, l, 1.0, 0.0}};
    try {
      spl(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidResult);
    }
  }
  try {
    spl({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoEpisodes);
  }
}

TEST(Spl, Properties) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 1000; ++trial) {
    auto results = random_results(rng, 1 + trial % 50);
    const double s = spl(results);
    const double sr = success_rate(results);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, sr + 1e-15);
    EXPECT_LE(sr, 1.0);

    auto shuffled = results;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(spl(shuffled), s, 1e-12);
    auto doubled = results;
    doubled.insert(doubled.end(), results.begin(), results.end());
    EXPECT_NEAR(spl(doubled), s, 1e-12);

    auto shorter = results;
    for (auto& r : shorter) r.path_length *= 0.7;
    EXPECT_GE(spl(shorter), s - 1e-15);
  }
}

TEST(SuccessRate, Examples) {
  std::vector<EpisodeResult> rs(1000, {false, 1.0, 1.0, 1.0});
  EXPECT_EQ(success_rate(rs), 0.0);
  for (int i = 0; i < 859; ++i) rs[i].success = true;
  EXPECT_DOUBLE_EQ(success_rate(rs), 0.859);
  for (auto& r : rs) r.success = true;
  EXPECT_EQ(success_rate(rs), 1.0);
}

TEST(AvgDistance, Examples) {
  std::vector<EpisodeResult> rs{{true, 1.0, 1.0, 0.0}, {false, 1.0, 1.0, 0.0}};
  EXPECT_EQ(avg_distance_from_goal(rs), 0.0);
  rs = {{true, 1.0, 1.0, 0.1}, {false, 1.0, 1.0, 0.5}};
  EXPECT_DOUBLE_EQ(avg_distance_from_goal(rs), 0.3);

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EpisodeResult> mc(100000);
  for (auto& r : mc) r = {false, 1.0, 1.0, u(rng)};
  EXPECT_NEAR(avg_distance_from_goal(mc), 0.5, 0.01);
}

TEST(FailureHistogram, BinsAndOverflow) {
  const std::vector<EpisodeResult> none{{true, 1.0, 1.0, 0.1}};
  for (const auto& b : failure_histogram(none, kDefaultHistogramEdges)) EXPECT_EQ(b.count, 0u);

  const std::vector<EpisodeResult> rs{{false, 1.0, 1.0, 0.3},  {false, 1.0, 1.0, 7.0},
                                      {false, 1.0, 1.0, 0.5},  {false, 1.0, 1.0, 25.0},
                                      {true, 1.0, 1.0, 0.1},   {false, 1.0, 1.0, 10.0},
                                      {false, 1.0, 1.0, 0.05}};
  const auto h = failure_histogram(rs, kDefaultHistogramEdges);
  ASSERT_EQ(h.size(), 6u);
  EXPECT_EQ(h[0].low, 0.2);
  EXPECT_EQ(h[0].high, 0.5);
  EXPECT_EQ(h[0].count, 2u);  // 0.3, and 0.05 (failed inside the radius)
  EXPECT_EQ(h[1].count, 1u);  // 0.5 is the low edge of [0.5, 1)
  EXPECT_EQ(h[4].count, 1u);  // 7 in [5, 10)
  EXPECT_EQ(h[5].count, 2u);  // 10 and 25 overflow
  EXPECT_TRUE(std::isinf(h[5].high));

  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_EQ(total, 6u);

  const std::vector<double> bad{0.2, 0.2, 1.0};
  EXPECT_THROW(failure_histogram(rs, bad), Error);
}

TEST(FailureHistogram, CountsSumToFailures) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rs = random_results(rng, 80);
    std::size_t total = 0;
    for (const auto& b : failure_histogram(rs, kDefaultHistogramEdges)) total += b.count;
    EXPECT_EQ(total, static_cast<std::size_t>(std::count_if(
                         rs.begin(), rs.end(), [](const auto& r) { return !r.success; })));
  }
}

TEST(Report, TableJsonCsv) {
  const std::vector<EpisodeResult> rs{{true, 2.0, 4.0, 0.1}, {false, 3.0, 3.0, 7.5}};
  const MetricsReport rep = evaluate(rs);
  EXPECT_EQ(rep.n, 2u);
  const std::string table = report_table(rep);
  EXPECT_NE(table.find("SPL"), std::string::npos);
  EXPECT_NE(table.find("Success rate"), std::string::npos);
  EXPECT_NE(table.find("Avg. dist. from goal"), std::string::npos);
  EXPECT_NE(table.find("0.2500"), std::string::npos);
  EXPECT_NE(table.find("3.8000"), std::string::npos);
  const std::string json = report_json(rep);
  EXPECT_NE(json.find("\"spl\": 0.25"), std::string::npos);
  const std::string csv = histogram_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin_low,bin_high,count");
  EXPECT_NE(csv.find("5.000,10.000,1"), std::string::npos);
  EXPECT_NE(csv.find("10.000,inf,0"), std::string::npos);
}
