#include "realnav/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <unordered_set>

#include "realnav/error.hpp"

namespace realnav {

namespace {
// Slack on the angular bucket range so rounding in the cosine test can never
// accept a record from a bucket the query skipped.
constexpr double kAngleMargin = 1e-6;
}  // namespace

void RetrievalConfig::validate() const {
  if (!(cos_threshold >= -1.0 && cos_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cos_threshold must lie in [-1, 1]");
  }
  if (heading_bins < 1) {
    throw Error(ErrorCode::kInvalidArgument, "heading_bins must be >= 1");
  }
  if (leaf_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "leaf_size must be >= 1");
  }
}

RetrievalIndex::RetrievalIndex(std::vector<ObservationRecord> records,
                               RetrievalConfig config)
    : records_(std::move(records)),
      config_(config),
      kernels_(config.kernels != nullptr ? config.kernels
                                         : &simd::active_kernels()) {
  config_.validate();
  if (records_.empty()) {
    throw Error(ErrorCode::kEmptyDatabase, "observation database is empty");
  }
  std::unordered_set<std::int64_t> seen;
  seen.reserve(records_.size());
  for (const auto& r : records_) {
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::kValidation,
                  "duplicate record id " + std::to_string(r.id));
    }
    if (!std::isfinite(r.pose.x) || !std::isfinite(r.pose.z)) {
      throw Error(ErrorCode::kValidation,
                  "record " + std::to_string(r.id) + " has a non-finite pose");
    }
  }

  const int bins = config_.heading_bins;
  std::vector<std::vector<std::size_t>> by_bin(static_cast<std::size_t>(bins));
  for (std::size_t i = 0; i < records_.size(); ++i) {
    by_bin[bin_of_angle(records_[i].pose.heading.angle())].push_back(i);
  }

  const std::size_t n = records_.size();
  x_.resize(n);
  z_.resize(n);
  u_.resize(n);
  v_.resize(n);
  id_.resize(n);
  slot_record_.resize(n);
  bin_root_.assign(static_cast<std::size_t>(bins), -1);

  std::vector<std::size_t> order;
  order.reserve(n);
  for (int b = 0; b < bins; ++b) {
    const auto& members = by_bin[static_cast<std::size_t>(b)];
    if (members.empty()) continue;
    const std::size_t begin = order.size();
    order.insert(order.end(), members.begin(), members.end());
    bin_root_[static_cast<std::size_t>(b)] = build_node(order, begin, order.size());
  }

  for (std::size_t slot = 0; slot < n; ++slot) {
    const auto& r = records_[order[slot]];
    x_[slot] = r.pose.x;
    z_[slot] = r.pose.z;
    u_[slot] = r.pose.heading.u();
    v_[slot] = r.pose.heading.v();
    id_[slot] = r.id;
    slot_record_[slot] = order[slot];
  }
}

int RetrievalIndex::bin_of_angle(double angle) const {
  const int bins = config_.heading_bins;
  const double width = 2.0 * std::numbers::pi / bins;
  const auto k = static_cast<long>(std::floor((angle + std::numbers::pi) / width));
  return static_cast<int>(((k % bins) + bins) % bins);
}

std::int32_t RetrievalIndex::build_node(std::vector<std::size_t>& order,
                                        std::size_t begin, std::size_t end) {
  Node node{};
  node.min_x = node.min_z = std::numeric_limits<double>::infinity();
  node.max_x = node.max_z = -std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) {
    const auto& p = records_[order[i]].pose;
    node.min_x = std::min(node.min_x, p.x);
    node.max_x = std::max(node.max_x, p.x);
    node.min_z = std::min(node.min_z, p.z);
    node.max_z = std::max(node.max_z, p.z);
  }
  node.begin = static_cast<std::uint32_t>(begin);
  node.end = static_cast<std::uint32_t>(end);
  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= static_cast<std::size_t>(config_.leaf_size)) return self;

  const bool split_x = (node.max_x - node.min_x) >= (node.max_z - node.min_z);
  const std::size_t mid = begin + (end - begin) / 2;
  auto key = [&](std::size_t rec) {
    const auto& p = records_[rec].pose;
    return std::pair{split_x ? p.x : p.z, rec};
  };
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                   order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  const std::int32_t left = build_node(order, begin, mid);
  const std::int32_t right = build_node(order, mid, end);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

simd::RecordColumns RetrievalIndex::columns() const noexcept {
  return {x_.data(), z_.data(), u_.data(), v_.data(), id_.data(), x_.size()};
}

namespace {
double box_distance2(double min_x, double max_x, double min_z, double max_z,
                     double qx, double qz) {
  const double dx = qx < min_x ? min_x - qx : (qx > max_x ? qx - max_x : 0.0);
  const double dz = qz < min_z ? min_z - qz : (qz > max_z ? qz - max_z : 0.0);
  return dx * dx + dz * dz;
}
}  // namespace

void RetrievalIndex::search(std::int32_t node_id, const simd::ScanQuery& q,
                            simd::ScanBest& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  // Equal distance must still be visited: a lower id may tie.
  if (box_distance2(node.min_x, node.max_x, node.min_z, node.max_z, q.x, q.z) >
      best.dist2) {
    return;
  }
  if (node.left < 0) {
    kernels_->scan_two_step(columns().slice(node.begin, node.end), q,
                            node.begin, best);
    return;
  }
  const Node& l = nodes_[static_cast<std::size_t>(node.left)];
  const Node& r = nodes_[static_cast<std::size_t>(node.right)];
  const double dl = box_distance2(l.min_x, l.max_x, l.min_z, l.max_z, q.x, q.z);
  const double dr = box_distance2(r.min_x, r.max_x, r.min_z, r.max_z, q.x, q.z);
  if (dl <= dr) {
    search(node.left, q, best);
    search(node.right, q, best);
  } else {
    search(node.right, q, best);
    search(node.left, q, best);
  }
}

RetrievalResult RetrievalIndex::retrieve(const Pose3& query) const {
  simd::ScanQuery q{query.x, query.z, query.heading.u(), query.heading.v(),
                    config_.cos_threshold};
  simd::ScanBest best;

  const int bins = config_.heading_bins;
  const double half_width =
      std::acos(std::clamp(config_.cos_threshold, -1.0, 1.0)) + kAngleMargin;
  if (half_width >= std::numbers::pi) {
    for (const std::int32_t root : bin_root_) {
      if (root >= 0) search(root, q, best);
    }
  } else {
    const double width = 2.0 * std::numbers::pi / bins;
    const double angle = query.heading.angle();
    const auto lo = static_cast<long>(
        std::floor((angle - half_width + std::numbers::pi) / width));
    const auto hi = static_cast<long>(
        std::floor((angle + half_width + std::numbers::pi) / width));
    const long count = std::min<long>(hi - lo + 1, bins);
    for (long k = lo; k < lo + count; ++k) {
      const auto b = static_cast<std::size_t>(((k % bins) + bins) % bins);
      if (bin_root_[b] >= 0) search(bin_root_[b], q, best);
    }
  }

  RetrievalResult result;
  if (!best.found()) {
    // Nothing passes the angle filter: fall back to the best-aligned headings.
    result.fallback = true;
    q.cos_threshold = kernels_->max_cosine(columns(), q.u, q.v);
    kernels_->scan_two_step(columns(), q, 0, best);
  }
  const auto& rec = records_[slot_record_[best.index]];
  result.record = &rec;
  result.xz_distance = std::sqrt(best.dist2);
  result.cosine = u_[best.index] * q.u + v_[best.index] * q.v;
  return result;
}

std::vector<RetrievalResult> RetrievalIndex::retrieve_batch(
    std::span<const Pose3> queries, int jobs) const {
  std::vector<RetrievalResult> out(queries.size());
  std::size_t workers =
      jobs > 0 ? static_cast<std::size_t>(jobs)
               : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, queries.size() / 64));
  if (workers <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = retrieve(queries[i]);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (queries.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(queries.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([this, &out, queries, begin, end] {
      for (std::size_t i = begin; i < end; ++i) out[i] = retrieve(queries[i]);
    });
  }
  pool.clear();
  return out;
}

}  // namespace realnav
