#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "iwpp/engine.hpp"
#include "iwpp/image.hpp"
#include "iwpp/neighborhood.hpp"
#include "iwpp/parallel.hpp"
#include "iwpp/scheduler.hpp"

namespace iwpp {

struct TileDims {
  int width = 4096;
  int height = 4096;
};

enum class TileState { Idle, Scheduled, Running, Stable };

struct Tile {
  int id = 0;
  Rect rect{};
};

/// Non-overlapping raster-ordered tiles covering the image; edge tiles may be smaller.
class TileGrid {
 public:
  /// Throws UsageError on non-positive tile dimensions.
  static TileGrid partition(Dims image, TileDims tile);

  Dims image_dims() const noexcept { return image_; }
  TileDims tile_dims() const noexcept { return tile_; }
  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  const std::vector<Tile>& tiles() const noexcept { return tiles_; }
  std::size_t size() const noexcept { return tiles_.size(); }
  int tile_of(int x, int y) const noexcept { return (y / tile_.height) * cols_ + x / tile_.width; }

  /// Per-tile lifecycle; each entry is written only by the task owning that tile.
  std::vector<TileState> state;

 private:
  Dims image_{};
  TileDims tile_{};
  int cols_ = 0;
  int rows_ = 0;
  std::vector<Tile> tiles_;
};

inline TileGrid TileGrid::partition(Dims image, TileDims tile) {
  if (tile.width <= 0 || tile.height <= 0) throw UsageError("tile dimensions must be positive");
  if (image.width <= 0 || image.height <= 0) throw UsageError("image dimensions must be positive");
  TileGrid g;
  g.image_ = image;
  g.tile_ = tile;
  g.cols_ = (image.width + tile.width - 1) / tile.width;
  g.rows_ = (image.height + tile.height - 1) / tile.height;
  for (int r = 0; r < g.rows_; ++r) {
    for (int c = 0; c < g.cols_; ++c) {
      const int x0 = c * tile.width;
      const int y0 = r * tile.height;
      g.tiles_.push_back({r * g.cols_ + c,
                          {x0, y0, std::min(tile.width, image.width - x0), std::min(tile.height, image.height - y0)}});
    }
  }
  g.state.assign(g.tiles_.size(), TileState::Idle);
  return g;
}

/// Splitting of one tile among a worker group. bands <= 1 disables micro-tiling.
struct MicroTileConfig {
  std::size_t bands = 1;
  std::size_t workers = 1;
};

struct PipelineConfig {
  TileDims tile{};
  std::size_t n_workers = 1;
  MicroTileConfig micro{};
};

struct TpResult {
  bool border_changed = false;
  PropagationStats stats{};
};

struct PipelineResult {
  PropagationStats stats{};
  std::size_t bp_waves = 0;
  std::size_t tp_tasks = 0;
  std::vector<TaskEvent> events;
};

namespace detail {

/// Seeds per region index, each list sorted and unique.
using SeedMap = std::map<int, std::vector<PixelIndex>>;

/// Cross-region propagation over every ordered neighbor pair (p, q) with p and q in different
/// regions of `regions` (all inside `bounds`). Merges are applied in place.
template <PropagationRule Rule, typename RegionOf>
SeedMap border_propagation(Image<typename Rule::value_type>& grid, const StructuringElement& g, const Rule& rule,
                           const std::vector<Rect>& regions, const Rect& bounds, RegionOf&& region_of) {
  const Dims dims = grid.dims();
  SeedMap seeds;
  auto visit = [&](int owner, int x, int y) {
    const Cell cp{dims.index({x, y}), x, y};
    for_each_neighbor(g.offsets(), x, y, bounds, [&](int nx, int ny) {
      const int other = region_of(nx, ny);
      if (other == owner) return;
      const Cell cq{dims.index({nx, ny}), nx, ny};
      const auto candidate = rule.offer(cp, grid[cp.index], cq);
      if (rule.improves(cq, candidate, grid[cq.index])) {
        grid[cq.index] = candidate;
        seeds[other].push_back(cq.index);
      }
    });
  };
  for (std::size_t id = 0; id < regions.size(); ++id) {
    const Rect& r = regions[id];
    const int owner = static_cast<int>(id);
    for (int x = r.x0; x < r.x1(); ++x) {
      visit(owner, x, r.y0);
      if (r.height > 1) visit(owner, x, r.y1() - 1);
    }
    for (int y = r.y0 + 1; y < r.y1() - 1; ++y) {
      visit(owner, r.x0, y);
      if (r.width > 1) visit(owner, r.x1() - 1, y);
    }
  }
  for (auto& [id, list] : seeds) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return seeds;
}

template <typename V>
std::vector<V> ring_values(const Image<V>& grid, const Rect& r) {
  std::vector<V> out;
  for (int y = r.y0; y < r.y1(); ++y)
    for (int x = r.x0; x < r.x1(); ++x)
      if (r.on_ring(x, y)) out.push_back(grid(x, y));
  return out;
}

inline std::vector<Rect> split_bands(const Rect& tile, std::size_t bands) {
  const auto n = std::max<std::size_t>(1, std::min<std::size_t>(bands, static_cast<std::size_t>(tile.height)));
  std::vector<Rect> out;
  for (std::size_t b = 0; b < n; ++b) {
    const int y0 = tile.y0 + static_cast<int>(static_cast<std::size_t>(tile.height) * b / n);
    const int y1 = tile.y0 + static_cast<int>(static_cast<std::size_t>(tile.height) * (b + 1) / n);
    out.push_back({tile.x0, y0, tile.width, y1 - y0});
  }
  return out;
}

}  // namespace detail

/// Tile propagation: runs the wavefront to stability inside `tile`, ignoring neighbors outside
/// it. With micro-tiling the tile is cut into horizontal bands propagated by a worker group
/// that exchanges band borders until the whole tile is stable.
template <PropagationRule Rule>
TpResult run_tp(Image<typename Rule::value_type>& grid, const StructuringElement& g, const Rule& rule,
                const Rect& tile, std::span<const PixelIndex> seeds, const MicroTileConfig& micro = {}) {
  TpResult result;
  if (seeds.empty()) return result;
  const auto ring_before = detail::ring_values(grid, tile);
  if (micro.bands <= 1) {
    result.stats = run_sequential(grid, g, rule, seeds, tile);
  } else {
    const auto bands = detail::split_bands(tile, micro.bands);
    auto band_of = [&](int, int y) {
      const auto it = std::upper_bound(bands.begin(), bands.end(), y, [](int v, const Rect& b) { return v < b.y0; });
      return static_cast<int>(it - bands.begin()) - 1;
    };
    std::vector<std::vector<PixelIndex>> pending(bands.size());
    const Dims dims = grid.dims();
    for (PixelIndex s : seeds) pending[static_cast<std::size_t>(band_of(0, dims.coord(s).y))].push_back(s);
    std::mutex stats_mutex;
    for (;;) {
      std::vector<std::size_t> active;
      for (std::size_t b = 0; b < bands.size(); ++b)
        if (!pending[b].empty()) active.push_back(b);
      if (active.empty()) break;
      parallel_chunks(static_cast<int>(active.size()), micro.workers, [&](int first, int last) {
        for (int i = first; i < last; ++i) {
          const std::size_t b = active[static_cast<std::size_t>(i)];
          const auto s = run_sequential(grid, g, rule, std::span<const PixelIndex>(pending[b]), bands[b]);
          std::lock_guard lock(stats_mutex);
          result.stats += s;
        }
      });
      for (auto& p : pending) p.clear();
      for (auto& [b, list] : detail::border_propagation(grid, g, rule, bands, tile, band_of))
        pending[static_cast<std::size_t>(b)] = std::move(list);
    }
  }
  result.border_changed = detail::ring_values(grid, tile) != ring_before;
  return result;
}

/// Border propagation across tile boundaries: applies each cross-tile merge and returns the
/// receiving tiles' seeds. An empty map means the image is globally stable.
template <PropagationRule Rule>
std::map<int, std::vector<PixelIndex>> run_bp(Image<typename Rule::value_type>& grid, const TileGrid& tiles,
                                              const StructuringElement& g, const Rule& rule) {
  std::vector<Rect> rects;
  rects.reserve(tiles.size());
  for (const Tile& t : tiles.tiles()) rects.push_back(t.rect);
  return detail::border_propagation(grid, g, rule, rects, Rect::whole(grid.dims()),
                                    [&](int x, int y) { return tiles.tile_of(x, y); });
}

/// Tiled TP/BP pipeline on a demand-driven pool. Wave 0 runs one TP per tile seeded by
/// init_tile(rect), which may also initialize that tile's pixels. Each BP depends on every TP
/// of its wave and spawns the next wave for tiles that received propagation.
template <PropagationRule Rule, typename InitTile>
PipelineResult run_pipeline(Image<typename Rule::value_type>& grid, const StructuringElement& g, const Rule& rule,
                            InitTile&& init_tile, const PipelineConfig& cfg) {
  TileGrid tiles = TileGrid::partition(grid.dims(), cfg.tile);
  TaskScheduler sched(cfg.n_workers);
  PipelineResult result;
  std::mutex result_mutex;

  auto add_stats = [&](const PropagationStats& s) {
    std::lock_guard lock(result_mutex);
    result.stats += s;
    ++result.tp_tasks;
  };

  std::function<void(int, const std::vector<TaskId>&)> submit_bp;
  submit_bp = [&](int wave, const std::vector<TaskId>& deps) {
    sched.submit(TaskKind::BorderProp, wave, -1, deps, [&, wave](std::size_t) {
      ++result.bp_waves;
      auto seeds = run_bp(grid, tiles, g, rule);
      if (seeds.empty()) return;
      std::vector<TaskId> next;
      for (auto& [tile_id, list] : seeds) {
        tiles.state[static_cast<std::size_t>(tile_id)] = TileState::Scheduled;
        next.push_back(sched.submit(TaskKind::TileProp, wave + 1, tile_id, {},
                                    [&, tile_id, list = std::move(list)](std::size_t) {
                                      const auto id = static_cast<std::size_t>(tile_id);
                                      tiles.state[id] = TileState::Running;
                                      add_stats(run_tp(grid, g, rule, tiles.tiles()[id].rect, list, cfg.micro).stats);
                                      tiles.state[id] = TileState::Stable;
                                    }));
      }
      submit_bp(wave + 1, next);
    });
  };

  std::vector<TaskId> wave0;
  for (const Tile& t : tiles.tiles()) {
    tiles.state[static_cast<std::size_t>(t.id)] = TileState::Scheduled;
    wave0.push_back(sched.submit(TaskKind::TileProp, 0, t.id, {}, [&, t](std::size_t) {
      const auto id = static_cast<std::size_t>(t.id);
      tiles.state[id] = TileState::Running;
      const std::vector<PixelIndex> seeds = init_tile(t.rect);
      add_stats(run_tp(grid, g, rule, t.rect, seeds, cfg.micro).stats);
      tiles.state[id] = TileState::Stable;
    }));
  }
  submit_bp(0, wave0);
  sched.run();
  result.events = sched.events();
  return result;
}

}  // namespace iwpp
