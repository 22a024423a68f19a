#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "iwpp/engine.hpp"
#include "iwpp/image.hpp"
#include "iwpp/neighborhood.hpp"
#include "iwpp/tiling.hpp"

namespace iwpp {

/// Background pixel a Voronoi cell is assigned to, or none() for "infinitely far".
struct alignas(8) Site {
  std::int32_t x = std::numeric_limits<std::int32_t>::min();
  std::int32_t y = std::numeric_limits<std::int32_t>::min();

  static constexpr Site none() noexcept { return {}; }
  static constexpr Site at(int x, int y) noexcept { return {x, y}; }
  constexpr bool is_none() const noexcept { return x == std::numeric_limits<std::int32_t>::min(); }

  friend constexpr bool operator==(const Site&, const Site&) = default;
};

using VoronoiMap = Image<Site>;
using DistanceMap = ImageF;

inline constexpr std::int64_t kInfiniteSquaredDistance = std::numeric_limits<std::int64_t>::max();

/// Exact squared Euclidean distance; none() is farther than any real site.
constexpr std::int64_t squared_distance(int x, int y, Site s) noexcept {
  if (s.is_none()) return kInfiniteSquaredDistance;
  const std::int64_t dx = static_cast<std::int64_t>(x) - s.x;
  const std::int64_t dy = static_cast<std::int64_t>(y) - s.y;
  return dx * dx + dy * dy;
}

/// q adopts p's site when that site is strictly closer to q; equal distances keep the incumbent.
struct VoronoiRule {
  using value_type = Site;

  Site offer(const Cell&, Site vp, const Cell&) const noexcept { return vp; }
  bool improves(const Cell& q, Site candidate, Site current) const noexcept {
    return squared_distance(q.x, q.y, candidate) < squared_distance(q.x, q.y, current);
  }
};

inline bool is_foreground(std::uint8_t v) noexcept { return v != 0; }

struct EdtInit {
  VoronoiMap vr;
  std::vector<PixelIndex> seeds;  ///< contour pixels: background with a foreground neighbor
};

/// Nonzero mask pixels are foreground. Background pixels point at themselves.
EdtInit edt_init(const Image8& mask, const StructuringElement& g);

enum class EdtMode { Sequential, Parallel, Tiled };

struct EdtOptions {
  EdtMode mode = EdtMode::Sequential;
  EngineConfig engine{};      ///< Parallel mode
  PipelineConfig pipeline{};  ///< Tiled mode
};

PropagationStats edt_propagate(VoronoiMap& vr, std::span<const PixelIndex> seeds, const StructuringElement& g);
PropagationStats edt_propagate(VoronoiMap& vr, std::span<const PixelIndex> seeds, const StructuringElement& g,
                               const EngineConfig& cfg);

/// M(p) = |p - vr(p)|. Throws NoBackgroundError if any pixel is still unassigned.
DistanceMap finalize_distance_map(const VoronoiMap& vr);

/// Per-pixel squared distance to the assigned site, the exact form used for comparisons.
Image<std::int64_t> squared_distance_map(const VoronoiMap& vr);

struct EdtResult {
  VoronoiMap vr;
  DistanceMap distance;
  PropagationStats stats;
  std::size_t bp_waves = 0;
  std::vector<TaskEvent> events;
};

/// Wavefront distance transform. Throws NoBackgroundError for masks without background.
EdtResult edt(const Image8& mask, const StructuringElement& g, const EdtOptions& options = {});

/// Minimum over all background pixels, by exhaustive scan. Quadratic; small images only.
DistanceMap edt_exact_bruteforce(const Image8& mask);
Image<std::int64_t> edt_exact_squared(const Image8& mask);

}  // namespace iwpp
