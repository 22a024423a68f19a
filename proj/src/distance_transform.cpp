#include "iwpp/distance_transform.hpp"

#include <cmath>

#include "iwpp/parallel.hpp"

namespace iwpp {

namespace {

// Initializes vr inside `r` and returns r's contour pixels in raster order.
std::vector<PixelIndex> init_region(const Image8& mask, const StructuringElement& g, VoronoiMap& vr, const Rect& r) {
  const Dims dims = mask.dims();
  const Rect whole = Rect::whole(dims);
  std::vector<PixelIndex> seeds;
  for (int y = r.y0; y < r.y1(); ++y) {
    for (int x = r.x0; x < r.x1(); ++x) {
      if (is_foreground(mask(x, y))) {
        vr(x, y) = Site::none();
        continue;
      }
      vr(x, y) = Site::at(x, y);
      bool contour = false;
      for_each_neighbor(g.offsets(), x, y, whole, [&](int nx, int ny) { contour = contour || is_foreground(mask(nx, ny)); });
      if (contour) seeds.push_back(dims.index({x, y}));
    }
  }
  return seeds;
}

std::vector<PixelIndex> init_parallel(const Image8& mask, const StructuringElement& g, VoronoiMap& vr,
                                      std::size_t n_workers) {
  const Dims dims = mask.dims();
  const auto n = std::max<std::size_t>(1, std::min<std::size_t>(n_workers, static_cast<std::size_t>(dims.height)));
  std::vector<std::vector<PixelIndex>> parts(n);
  parallel_chunks(static_cast<int>(n), n, [&](int first, int last) {
    for (int w = first; w < last; ++w) {
      const auto wi = static_cast<std::size_t>(w);
      const int y0 = static_cast<int>(static_cast<std::size_t>(dims.height) * wi / n);
      const int y1 = static_cast<int>(static_cast<std::size_t>(dims.height) * (wi + 1) / n);
      parts[wi] = init_region(mask, g, vr, {0, y0, dims.width, y1 - y0});
    }
  });
  std::vector<PixelIndex> seeds;
  for (auto& p : parts) seeds.insert(seeds.end(), p.begin(), p.end());
  return seeds;
}

bool has_background(const Image8& mask) {
  for (std::uint8_t v : mask.pixels())
    if (!is_foreground(v)) return true;
  return false;
}

}  // namespace

EdtInit edt_init(const Image8& mask, const StructuringElement& g) {
  EdtInit out{VoronoiMap(mask.dims()), {}};
  out.seeds = init_region(mask, g, out.vr, Rect::whole(mask.dims()));
  return out;
}

PropagationStats edt_propagate(VoronoiMap& vr, std::span<const PixelIndex> seeds, const StructuringElement& g) {
  return run_sequential(vr, g, VoronoiRule{}, seeds);
}

PropagationStats edt_propagate(VoronoiMap& vr, std::span<const PixelIndex> seeds, const StructuringElement& g,
                               const EngineConfig& cfg) {
  return run_parallel(vr, g, VoronoiRule{}, seeds, cfg);
}

DistanceMap finalize_distance_map(const VoronoiMap& vr) {
  DistanceMap out(vr.dims());
  for (int y = 0; y < vr.height(); ++y) {
    for (int x = 0; x < vr.width(); ++x) {
      const Site s = vr(x, y);
      if (s.is_none()) throw NoBackgroundError();
      out(x, y) = static_cast<float>(std::sqrt(static_cast<double>(squared_distance(x, y, s))));
    }
  }
  return out;
}

Image<std::int64_t> squared_distance_map(const VoronoiMap& vr) {
  Image<std::int64_t> out(vr.dims());
  for (int y = 0; y < vr.height(); ++y)
    for (int x = 0; x < vr.width(); ++x) out(x, y) = squared_distance(x, y, vr(x, y));
  return out;
}

EdtResult edt(const Image8& mask, const StructuringElement& g, const EdtOptions& options) {
  if (!has_background(mask)) throw NoBackgroundError();
  EdtResult result;
  switch (options.mode) {
    case EdtMode::Sequential: {
      auto init = edt_init(mask, g);
      result.vr = std::move(init.vr);
      result.stats = edt_propagate(result.vr, init.seeds, g);
      break;
    }
    case EdtMode::Parallel: {
      result.vr = VoronoiMap(mask.dims());
      const auto seeds = init_parallel(mask, g, result.vr, options.engine.n_workers);
      result.stats = edt_propagate(result.vr, seeds, g, options.engine);
      break;
    }
    case EdtMode::Tiled: {
      result.vr = VoronoiMap(mask.dims());
      auto init_tile = [&](const Rect& r) { return init_region(mask, g, result.vr, r); };
      auto run = run_pipeline(result.vr, g, VoronoiRule{}, init_tile, options.pipeline);
      result.stats = run.stats;
      result.bp_waves = run.bp_waves;
      result.events = std::move(run.events);
      break;
    }
  }
  result.distance = finalize_distance_map(result.vr);
  return result;
}

Image<std::int64_t> edt_exact_squared(const Image8& mask) {
  std::vector<Coord> background;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (!is_foreground(mask(x, y))) background.push_back({x, y});
  if (background.empty()) throw NoBackgroundError();
  Image<std::int64_t> out(mask.dims());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      std::int64_t best = kInfiniteSquaredDistance;
      for (const Coord b : background) best = std::min(best, squared_distance(x, y, Site::at(b.x, b.y)));
      out(x, y) = best;
    }
  }
  return out;
}

DistanceMap edt_exact_bruteforce(const Image8& mask) {
  const auto sq = edt_exact_squared(mask);
  DistanceMap out(mask.dims());
  for (PixelIndex i = 0; i < sq.size(); ++i) out[i] = static_cast<float>(std::sqrt(static_cast<double>(sq[i])));
  return out;
}

}  // namespace iwpp
