#include "realnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "realnav/error.hpp"

namespace realnav {

namespace {
void require_nonempty(std::span<const EpisodeResult> results) {
  if (results.empty()) throw Error(ErrorCode::kNoEpisodes, "no episodes to evaluate");
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}
}  // namespace

double spl(std::span<const EpisodeResult> results) {
  require_nonempty(results);
  double sum = 0.0;
  for (const auto& r : results) {
    if (!(r.shortest_geodesic > 0.0) || !std::isfinite(r.shortest_geodesic)) {
      throw Error(ErrorCode::kInvalidResult,
                  "shortest geodesic must be > 0, got " +
                      std::to_string(r.shortest_geodesic));
    }
    if (!(r.path_length >= 0.0)) {
      throw Error(ErrorCode::kInvalidResult, "path length must be >= 0");
    }
    if (r.success) {
      sum += r.shortest_geodesic / std::max(r.shortest_geodesic, r.path_length);
    }
  }
  return sum / static_cast<double>(results.size());
}

double success_rate(std::span<const EpisodeResult> results) {
  require_nonempty(results);
  const auto n = std::count_if(results.begin(), results.end(),
                               [](const EpisodeResult& r) { return r.success; });
  return static_cast<double>(n) / static_cast<double>(results.size());
}

double avg_distance_from_goal(std::span<const EpisodeResult> results) {
  require_nonempty(results);
  double sum = 0.0;
  for (const auto& r : results) sum += r.final_distance;
  return sum / static_cast<double>(results.size());
}

std::vector<HistogramBin> failure_histogram(std::span<const EpisodeResult> results,
                                            std::span<const double> edges) {
  if (edges.empty()) throw Error(ErrorCode::kInvalidArgument, "no histogram edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "histogram edges must be strictly increasing");
    }
  }
  std::vector<HistogramBin> bins;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    bins.push_back({edges[i],
                    i + 1 < edges.size() ? edges[i + 1]
                                         : std::numeric_limits<double>::infinity(),
                    0});
  }
  for (const auto& r : results) {
    if (r.success) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), r.final_distance);
    const std::size_t bin =
        it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    ++bins[bin].count;
  }
  return bins;
}

MetricsReport evaluate(std::span<const EpisodeResult> results,
                       std::span<const double> edges) {
  MetricsReport r;
  r.spl = spl(results);
  r.success_rate = success_rate(results);
  r.avg_dist_from_goal = avg_distance_from_goal(results);
  r.n = results.size();
  r.histogram = failure_histogram(results, edges);
  return r;
}

std::string report_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["spl"] = report.spl;
  j["success_rate"] = report.success_rate;
  j["avg_dist_from_goal"] = report.avg_dist_from_goal;
  auto& hist = j["failure_histogram"] = nlohmann::ordered_json::array();
  for (const auto& b : report.histogram) {
    nlohmann::ordered_json bin;
    bin["low"] = b.low;
    bin["high"] = std::isfinite(b.high) ? nlohmann::ordered_json(b.high)
                                        : nlohmann::ordered_json(nullptr);
    bin["count"] = b.count;
    hist.push_back(bin);
  }
  return j.dump(2) + "\n";
}

std::string report_table(const MetricsReport& report) {
  const std::vector<std::pair<std::string, std::string>> cols{
      {"Episodes", std::to_string(report.n)},
      {"SPL", fixed(report.spl, 4)},
      {"Success rate", fixed(report.success_rate, 4)},
      {"Avg. dist. from goal", fixed(report.avg_dist_from_goal, 4)}};
  std::string header;
  std::string row;
  for (const auto& [name, value] : cols) {
    const std::size_t w = std::max(name.size(), value.size());
    if (!header.empty()) {
      header += "  ";
      row += "  ";
    }
    header += std::string(w - name.size(), ' ') + name;
    row += std::string(w - value.size(), ' ') + value;
  }
  return header + "\n" + row + "\n";
}

std::string histogram_csv(const MetricsReport& report) {
  std::string out = "bin_low,bin_high,count\n";
  for (const auto& b : report.histogram) {
    out += fixed(b.low, 3) + "," + (std::isfinite(b.high) ? fixed(b.high, 3) : "inf") +
           "," + std::to_string(b.count) + "\n";
  }
  return out;
}

}  // namespace realnav
