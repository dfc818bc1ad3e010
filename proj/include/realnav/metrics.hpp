#pragma once

#include <span>
#include <string>
#include <vector>

namespace realnav {

struct EpisodeResult {
  bool success = false;
  double shortest_geodesic = 0.0;  // l
  double path_length = 0.0;        // p
  double final_distance = 0.0;
};

/// Mean of S * l / max(l, p). Throws kInvalidResult if any l <= 0 and
/// kNoEpisodes for an empty set.
double spl(std::span<const EpisodeResult> results);
double success_rate(std::span<const EpisodeResult> results);
/// Mean final distance over every episode, successful or not.
double avg_distance_from_goal(std::span<const EpisodeResult> results);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;  // +infinity for the overflow bin
  std::size_t count = 0;
};

inline const std::vector<double> kDefaultHistogramEdges{0.2, 0.5, 1.0, 2.0, 5.0, 10.0};

/// Failed episodes binned by final distance into [e_i, e_i+1) plus an overflow
/// bin [e_last, inf). Failures closer than the first edge are counted in the
/// first bin. Throws kInvalidArgument unless the edges are strictly increasing.
std::vector<HistogramBin> failure_histogram(std::span<const EpisodeResult> results,
                                            std::span<const double> edges);

struct MetricsReport {
  double spl = 0.0;
  double success_rate = 0.0;
  double avg_dist_from_goal = 0.0;
  std::size_t n = 0;
  std::vector<HistogramBin> histogram;
};

MetricsReport evaluate(std::span<const EpisodeResult> results,
                       std::span<const double> edges = kDefaultHistogramEdges);

std::string report_json(const MetricsReport& report);
/// Aligned text table with columns `SPL`, `Success rate`, `Avg. dist. from goal`.
std::string report_table(const MetricsReport& report);
/// `bin_low,bin_high,count` rows.
std::string histogram_csv(const MetricsReport& report);

}  // namespace realnav
