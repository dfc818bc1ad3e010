#include "realnav/world_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <string>

#include "realnav/error.hpp"
#include "text_util.hpp"

namespace realnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Step {
  int dc;
  int dr;
  bool diagonal;
};

constexpr Step kSteps[8] = {{1, 0, false},  {-1, 0, false}, {0, 1, false},
                            {0, -1, false}, {1, 1, true},   {1, -1, true},
                            {-1, 1, true},  {-1, -1, true}};

bool can_step(const OccupancyGrid& grid, Cell from, const Step& s) {
  const Cell to{from.col + s.dc, from.row + s.dr};
  if (!grid.navigable(to)) return false;
  if (!s.diagonal) return true;
  return grid.navigable(Cell{from.col + s.dc, from.row}) &&
         grid.navigable(Cell{from.col, from.row + s.dr});
}

// Per-thread search scratch, reset lazily through a generation stamp.
struct SearchScratch {
  std::vector<double> g;
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> stamp;
  std::uint32_t generation = 0;

  void prepare(std::size_t n) {
    if (g.size() != n) {
      g.assign(n, kInf);
      parent.assign(n, 0);
      stamp.assign(n, 0);
      generation = 0;
    }
    if (++generation == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      generation = 1;
    }
  }
  double cost(std::size_t i) const { return stamp[i] == generation ? g[i] : kInf; }
  void set(std::size_t i, double value, std::uint32_t from) {
    stamp[i] = generation;
    g[i] = value;
    parent[i] = from;
  }
};

SearchScratch& scratch() {
  thread_local SearchScratch s;
  return s;
}

double octile(const OccupancyGrid& grid, Cell a, Cell b) {
  const int dc = std::abs(a.col - b.col);
  const int dr = std::abs(a.row - b.row);
  const int lo = std::min(dc, dr);
  const int hi = std::max(dc, dr);
  return grid.resolution() * ((hi - lo) + std::numbers::sqrt2 * lo);
}

// A* over cell centers. Leaves parents in scratch() when found.
std::optional<double> astar(const OccupancyGrid& grid, Cell source, Cell target) {
  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  SearchScratch& s = scratch();
  s.prepare(n);
  const std::size_t src = grid.index(source);
  const std::size_t dst = grid.index(target);
  const double straight = grid.resolution();
  const double diagonal = grid.resolution() * std::numbers::sqrt2;

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  s.set(src, 0.0, static_cast<std::uint32_t>(src));
  open.emplace(octile(grid, source, target), src);
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    const Cell c = grid.cell_at(idx);
    const double g = s.cost(idx);
    if (f > g + octile(grid, c, target) + 1e-12) continue;  // stale entry
    if (idx == dst) return g;
    for (const Step& st : kSteps) {
      if (!can_step(grid, c, st)) continue;
      const Cell nc{c.col + st.dc, c.row + st.dr};
      const std::size_t ni = grid.index(nc);
      const double ng = g + (st.diagonal ? diagonal : straight);
      if (ng < s.cost(ni)) {
        s.set(ni, ng, static_cast<std::uint32_t>(idx));
        open.emplace(ng + octile(grid, nc, target), ni);
      }
    }
  }
  return std::nullopt;
}

Cell require_navigable(const OccupancyGrid& grid, const Point2& p,
                       const char* which) {
  const auto c = grid.cell_of(p);
  if (!c || !grid.navigable(*c)) {
    throw Error(ErrorCode::kInvalidEndpoint,
                std::string(which) + " endpoint (" + std::to_string(p.x) + ", " +
                    std::to_string(p.z) + ") is not navigable");
  }
  return *c;
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double resolution,
                             double origin_x, double origin_z,
                             std::vector<std::uint8_t> navigable)
    : width_(width),
      height_(height),
      resolution_(resolution),
      origin_x_(origin_x),
      origin_z_(origin_z),
      cells_(std::move(navigable)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid dimensions must be >= 1");
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kInvalidArgument, "grid resolution must be > 0");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_z)) {
    throw Error(ErrorCode::kInvalidArgument, "grid origin must be finite");
  }
  if (cells_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "cell buffer size mismatch");
  }
  rebuild_navigable_list();
}

OccupancyGrid OccupancyGrid::open(int width, int height, double resolution,
                                  double origin_x, double origin_z) {
  return OccupancyGrid(width, height, resolution, origin_x, origin_z,
                       std::vector<std::uint8_t>(
                           static_cast<std::size_t>(std::max(width, 0)) *
                               std::max(height, 0),
                           1));
}

void OccupancyGrid::rebuild_navigable_list() {
  navigable_.clear();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i] != 0) navigable_.push_back(i);
  }
}

void OccupancyGrid::set_navigable(Cell c, bool value) {
  if (!in_bounds(c)) {
    throw Error(ErrorCode::kInvalidArgument, "cell outside grid");
  }
  cells_[index(c)] = value ? 1 : 0;
  rebuild_navigable_list();
}

std::optional<Cell> OccupancyGrid::cell_of(const Point2& p) const noexcept {
  const double fc = std::floor((p.x - origin_x_) / resolution_);
  const double fr = std::floor((p.z - origin_z_) / resolution_);
  if (!(fc >= 0.0 && fr >= 0.0 && fc < width_ && fr < height_)) {
    return std::nullopt;
  }
  return Cell{static_cast<int>(fc), static_cast<int>(fr)};
}

Point2 OccupancyGrid::center(Cell c) const noexcept {
  return {origin_x_ + (c.col + 0.5) * resolution_,
          origin_z_ + (c.row + 0.5) * resolution_};
}

bool is_navigable(const OccupancyGrid& grid, const Point2& p) noexcept {
  const auto c = grid.cell_of(p);
  return c && grid.navigable(*c);
}

// ---------------------------------------------------------------------------
// Map files

namespace {

OccupancyGrid parse_pgm(std::istream& in, const std::filesystem::path& path) {
  auto next_token = [&in]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw ParseError(1, "truncated PGM header");
  };
  if (next_token() != "P5") throw ParseError(1, "not a binary PGM (P5)");
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::logic_error&) {
    throw ParseError(1, "malformed PGM header");
  }
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    throw ParseError(1, "unsupported PGM dimensions or maxval");
  }
  in.get();  // single whitespace after maxval
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw ParseError(1, "PGM pixel data shorter than width*height");
  }

  std::filesystem::path meta = path;
  meta += ".meta";
  std::ifstream meta_in(meta);
  if (!meta_in) {
    throw Error(ErrorCode::kIo, "missing PGM sidecar " + meta.string());
  }
  std::string line;
  std::size_t line_no = 0;
  double res = 0.0;
  double ox = 0.0;
  double oz = 0.0;
  bool found = false;
  while (std::getline(meta_in, line)) {
    ++line_no;
    const auto body = detail::strip_comment(line);
    if (detail::is_blank(body)) continue;
    std::istringstream fields{std::string(body)};
    if (!(fields >> res >> ox >> oz)) {
      throw ParseError(line_no,
                       "sidecar expects `resolution origin_x origin_z`");
    }
    found = true;
    break;
  }
  if (!found) throw ParseError(line_no, "empty PGM sidecar");

  std::vector<std::uint8_t> cells(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    cells[i] = (raw[i] * 255 / maxval) >= 128 ? 1 : 0;
  }
  return OccupancyGrid(width, height, res, ox, oz, std::move(cells));
}

}  // namespace

OccupancyGrid parse_grid(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw ParseError(1, "empty map file");
  std::istringstream header(line);
  int width = 0;
  int height = 0;
  double res = 0.0;
  double ox = 0.0;
  double oz = 0.0;
  if (!(header >> width >> height >> res >> ox >> oz)) {
    throw ParseError(line_no,
                     "header must be `width height resolution origin_x origin_z`");
  }
  std::string extra;
  if (header >> extra) throw ParseError(line_no, "trailing header token '" + extra + "'");
  if (width < 1 || height < 1) throw ParseError(line_no, "width and height must be >= 1");
  if (!(res > 0.0)) throw ParseError(line_no, "resolution must be > 0");

  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    if (!next_line()) {
      throw ParseError(line_no + 1, "expected " + std::to_string(height) +
                                        " rows, found " + std::to_string(r));
    }
    if (static_cast<int>(line.size()) != width) {
      throw ParseError(line_no, "row has " + std::to_string(line.size()) +
                                    " cells, expected " + std::to_string(width));
    }
    for (int c = 0; c < width; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      if (ch != '.' && ch != '#') {
        throw ParseError(line_no, std::string("unknown cell token '") + ch + "'");
      }
      cells[static_cast<std::size_t>(r) * width + c] = ch == '.' ? 1 : 0;
    }
  }
  while (next_line()) {
    if (!detail::is_blank(line)) {
      throw ParseError(line_no, "unexpected content after the last row");
    }
  }
  return OccupancyGrid(width, height, res, ox, oz, std::move(cells));
}

OccupancyGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open map " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  in.clear();
  in.seekg(0);
  if (magic[0] == 'P' && magic[1] == '5') return parse_pgm(in, path);
  return parse_grid(in);
}

void write_grid(std::ostream& out, const OccupancyGrid& grid) {
  std::ostringstream header;
  header.precision(17);
  header << grid.width() << ' ' << grid.height() << ' ' << grid.resolution()
         << ' ' << grid.origin_x() << ' ' << grid.origin_z() << '\n';
  out << header.str();
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      out << (grid.navigable(Cell{c, r}) ? '.' : '#');
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Paths

namespace {

struct CanonicalQuery {
  Cell source;
  Cell target;
  Point2 source_point;
  Point2 target_point;
  bool swapped;
};

CanonicalQuery canonicalize(const OccupancyGrid& grid, const Point2& a, Cell ca,
                            const Point2& b, Cell cb) {
  // Always search from the lower cell index so results are exactly symmetric.
  if (grid.index(cb) < grid.index(ca)) return {cb, ca, b, a, true};
  return {ca, cb, a, b, false};
}

// Center-to-center path length, corrected by the residual between the true
// endpoint displacement and the snapped one.
double with_offsets(const OccupancyGrid& grid, const CanonicalQuery& q,
                    double cells) {
  const double excess = cells - distance(grid.center(q.source), grid.center(q.target));
  return distance(q.source_point, q.target_point) + std::max(0.0, excess);
}

}  // namespace

std::optional<double> geodesic_distance(const OccupancyGrid& grid,
                                        const Point2& a, const Point2& b) {
  const Cell ca = require_navigable(grid, a, "start");
  const Cell cb = require_navigable(grid, b, "goal");
  if (ca == cb) return distance(a, b);
  const CanonicalQuery q = canonicalize(grid, a, ca, b, cb);
  const auto cells = astar(grid, q.source, q.target);
  if (!cells) return std::nullopt;
  return with_offsets(grid, q, *cells);
}

std::optional<PathResult> shortest_path(const OccupancyGrid& grid,
                                        const Point2& a, const Point2& b) {
  const Cell ca = require_navigable(grid, a, "start");
  const Cell cb = require_navigable(grid, b, "goal");
  PathResult result;
  if (ca == cb) {
    result.length = distance(a, b);
    result.waypoints.push_back(grid.center(ca));
    return result;
  }
  const CanonicalQuery q = canonicalize(grid, a, ca, b, cb);
  const auto cells = astar(grid, q.source, q.target);
  if (!cells) return std::nullopt;
  result.length = with_offsets(grid, q, *cells);

  const SearchScratch& s = scratch();
  std::size_t idx = grid.index(q.target);
  const std::size_t src = grid.index(q.source);
  while (true) {
    result.waypoints.push_back(grid.center(grid.cell_at(idx)));
    if (idx == src) break;
    idx = s.parent[idx];
  }
  // Collected target->source; flip when the caller's `a` is the source.
  if (!q.swapped) std::reverse(result.waypoints.begin(), result.waypoints.end());
  return result;
}

std::vector<double> distance_field(const OccupancyGrid& grid, Cell source,
                                   std::span<const double> cell_cost) {
  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  if (!cell_cost.empty() && cell_cost.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "cell cost size mismatch");
  }
  std::vector<double> dist(n, kInf);
  if (!grid.navigable(source)) return dist;
  const double straight = grid.resolution();
  const double diagonal = grid.resolution() * std::numbers::sqrt2;

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[grid.index(source)] = 0.0;
  open.emplace(0.0, grid.index(source));
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist[idx]) continue;
    const Cell c = grid.cell_at(idx);
    for (const Step& st : kSteps) {
      if (!can_step(grid, c, st)) continue;
      const std::size_t ni = grid.index(Cell{c.col + st.dc, c.row + st.dr});
      double step = st.diagonal ? diagonal : straight;
      if (!cell_cost.empty()) step *= cell_cost[ni];
      const double nd = d + step;
      if (nd < dist[ni]) {
        dist[ni] = nd;
        open.emplace(nd, ni);
      }
    }
  }
  return dist;
}

Point2 sample_navigable_point(const OccupancyGrid& grid, std::mt19937_64& rng) {
  const auto cells = grid.navigable_cells();
  if (cells.empty()) {
    throw Error(ErrorCode::kEmptyMap, "grid has no navigable cell");
  }
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Cell c = grid.cell_at(cells[pick(rng)]);
  const double x0 = grid.origin_x() + c.col * grid.resolution();
  const double z0 = grid.origin_z() + c.row * grid.resolution();
  while (true) {
    const Point2 p{x0 + unit(rng) * grid.resolution(),
                   z0 + unit(rng) * grid.resolution()};
    // Rounding can land exactly on the high edge, which belongs to the neighbor.
    if (grid.cell_of(p) == std::optional<Cell>(c)) return p;
  }
}

Pose3 attempt_move(const OccupancyGrid& grid, const Pose3& from,
                   double distance) {
  if (!(distance > 0.0)) return from;
  if (!is_navigable(grid, from.position())) return from;
  const Point2 dir = from.heading.forward();
  auto at = [&](double t) {
    return Pose3{from.x + dir.x * t, from.z + dir.z * t, from.heading};
  };

  const double step = grid.resolution() / 4.0;
  const auto n = static_cast<long>(std::ceil(distance / step));
  double last_free = 0.0;
  for (long i = 1; i <= n; ++i) {
    const double t = std::min(static_cast<double>(i) * step, distance);
    if (is_navigable(grid, at(t).position())) {
      last_free = t;
      continue;
    }
    // Refine the contact point between the last free and first blocked sample.
    double lo = last_free;
    double hi = t;
    for (int k = 0; k < 64 && hi - lo > 0.0; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (is_navigable(grid, at(mid).position())) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo == 0.0 ? from : at(lo);
  }
  return at(distance);
}

bool segment_navigable(const OccupancyGrid& grid, const Point2& a,
                       const Point2& b) {
  const double len = distance(a, b);
  const double step = grid.resolution() / 4.0;
  const auto n = static_cast<long>(std::ceil(len / step));
  if (!is_navigable(grid, a)) return false;
  for (long i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    if (!is_navigable(grid, {a.x + (b.x - a.x) * t, a.z + (b.z - a.z) * t})) {
      return false;
    }
  }
  return true;
}

std::optional<Cell> nearest_navigable_cell(const OccupancyGrid& grid,
                                           const Point2& p) {
  if (const auto c = grid.cell_of(p); c && grid.navigable(*c)) return c;
  std::optional<Cell> best;
  double best_d = kInf;
  for (const std::size_t idx : grid.navigable_cells()) {
    const Cell c = grid.cell_at(idx);
    const double d = distance(p, grid.center(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace realnav
