#pragma once

#include <algorithm>
#include <deque>
#include <span>
#include <vector>

#include "iwpp/atomic_merge.hpp"
#include "iwpp/engine.hpp"
#include "iwpp/image.hpp"
#include "iwpp/neighborhood.hpp"
#include "iwpp/parallel.hpp"
#include "iwpp/tiling.hpp"

namespace iwpp {

/// Reconstruction update: p offers min(J(p), I(q)) to q, accepted when it raises J(q).
/// Under J <= I this is exactly "J(q) < J(p) and I(q) != J(q)".
template <PixelType T>
struct ReconstructionRule {
  using value_type = T;

  const T* mask;

  T offer(const Cell&, T jp, const Cell& q) const noexcept { return std::min(jp, mask[q.index]); }
  bool improves(const Cell&, T candidate, T current) const noexcept { return candidate > current; }
};

/// Throws ContractViolation unless mask and marker share dimensions and marker <= mask.
template <PixelType T>
void check_recon_input(const Image<T>& mask, const Image<T>& marker) {
  if (mask.dims() != marker.dims()) throw ContractViolation("mask and marker dimensions differ");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (marker[static_cast<PixelIndex>(i)] > mask[static_cast<PixelIndex>(i)]) {
      const Coord c = mask.dims().coord(static_cast<PixelIndex>(i));
      throw ContractViolation("marker exceeds mask at (" + std::to_string(c.x) + "," + std::to_string(c.y) + ")");
    }
  }
}

namespace detail {

template <PixelType T>
bool scan_region(const Image<T>& mask, Image<T>& marker, std::span<const Offset> half, const Rect& r,
                 bool forward, std::vector<PixelIndex>* seeds) {
  const Dims dims = mask.dims();
  bool changed = false;
  auto visit = [&](int x, int y) {
    const PixelIndex p = dims.index({x, y});
    T v = marker[p];
    for_each_neighbor(half, x, y, r, [&](int nx, int ny) { v = std::max(v, marker(nx, ny)); });
    v = std::min(v, mask[p]);
    if (v != marker[p]) {
      marker[p] = v;
      changed = true;
    }
    if (seeds != nullptr) {
      bool seed = false;
      for_each_neighbor(half, x, y, r, [&](int nx, int ny) {
        const T jq = marker(nx, ny);
        seed = seed || (jq < v && jq < mask(nx, ny));
      });
      if (seed) seeds->push_back(p);
    }
  };
  if (forward) {
    for (int y = r.y0; y < r.y1(); ++y)
      for (int x = r.x0; x < r.x1(); ++x) visit(x, y);
  } else {
    for (int y = r.y1() - 1; y >= r.y0; --y)
      for (int x = r.x1() - 1; x >= r.x0; --x) visit(x, y);
  }
  return changed;
}

}  // namespace detail

/// Raster scan: J(p) <- max{J(q), q in N_G^+(p) U {p}} ^ I(p). Returns whether J changed.
template <PixelType T>
bool raster_pass(const Image<T>& mask, Image<T>& marker, const StructuringElement& g) {
  check_recon_input(mask, marker);
  return detail::scan_region(mask, marker, g.half(ScanPhase::Raster), Rect::whole(mask.dims()), true, nullptr);
}

template <PixelType T>
struct AntirasterResult {
  bool changed = false;
  std::vector<PixelIndex> seeds;  ///< anti-raster order
};

/// Anti-raster scan over N_G^-, also collecting pixels p with a q in N_G^-(p) such that
/// J(q) < J(p) and J(q) < I(q).
template <PixelType T>
AntirasterResult<T> antiraster_pass(const Image<T>& mask, Image<T>& marker, const StructuringElement& g) {
  check_recon_input(mask, marker);
  AntirasterResult<T> out;
  out.changed = detail::scan_region(mask, marker, g.half(ScanPhase::Antiraster), Rect::whole(mask.dims()), false,
                                    &out.seeds);
  return out;
}

/// Sequential reconstruction: alternate raster and anti-raster scans until stable.
template <PixelType T>
Image<T> recon_sr(const Image<T>& mask, const Image<T>& marker, const StructuringElement& g,
                  std::size_t* scan_pairs = nullptr) {
  check_recon_input(mask, marker);
  Image<T> j = marker;
  const Rect whole = Rect::whole(mask.dims());
  std::size_t pairs = 0;
  for (;;) {
    ++pairs;
    const bool a = detail::scan_region(mask, j, g.half(ScanPhase::Raster), whole, true, nullptr);
    const bool b = detail::scan_region(mask, j, g.half(ScanPhase::Antiraster), whole, false, nullptr);
    if (!a && !b) break;
  }
  if (scan_pairs != nullptr) *scan_pairs = pairs;
  return j;
}

/// Pixels on plateaus (connected equal-valued components under g) with no strictly greater
/// neighbor, in raster order.
template <PixelType T>
std::vector<Coord> regional_maxima(const Image<T>& img, const StructuringElement& g) {
  const Dims dims = img.dims();
  const Rect whole = Rect::whole(dims);
  std::vector<char> visited(img.size(), 0);
  std::vector<char> is_max(img.size(), 0);
  std::vector<PixelIndex> component;
  std::deque<PixelIndex> frontier;
  for (PixelIndex start = 0; start < img.size(); ++start) {
    if (visited[start]) continue;
    const T level = img[start];
    bool maximal = true;
    component.clear();
    frontier.assign(1, start);
    visited[start] = 1;
    while (!frontier.empty()) {
      const PixelIndex p = frontier.front();
      frontier.pop_front();
      component.push_back(p);
      const Coord c = dims.coord(p);
      for_each_neighbor(g.offsets(), c.x, c.y, whole, [&](int x, int y) {
        const PixelIndex q = dims.index({x, y});
        if (img[q] > level) maximal = false;
        if (img[q] == level && !visited[q]) {
          visited[q] = 1;
          frontier.push_back(q);
        }
      });
    }
    if (maximal)
      for (PixelIndex p : component) is_max[p] = 1;
  }
  std::vector<Coord> out;
  for (PixelIndex p = 0; p < img.size(); ++p)
    if (is_max[p]) out.push_back(dims.coord(p));
  return out;
}

/// Queue-based reconstruction seeded from the marker's regional maxima.
///
/// A pixel already at its mask value is never raised, so it is never enqueued by a
/// neighbor; saturated pixels that sit above a neighbor therefore join the initial queue
/// too. Without them, markers that touch the mask below a regional maximum reconstruct
/// incorrectly.
template <PixelType T>
Image<T> recon_qb(const Image<T>& mask, const Image<T>& marker, const StructuringElement& g,
                  PropagationStats* stats = nullptr) {
  check_recon_input(mask, marker);
  const Dims dims = mask.dims();
  const Rect whole = Rect::whole(dims);
  std::vector<char> seeded(mask.size(), 0);
  for (const Coord c : regional_maxima(marker, g)) seeded[dims.index(c)] = 1;
  for (PixelIndex p = 0; p < mask.size(); ++p) {
    if (seeded[p] || marker[p] != mask[p]) continue;
    const Coord c = dims.coord(p);
    for_each_neighbor(g.offsets(), c.x, c.y, whole, [&](int x, int y) {
      if (marker(x, y) < marker[p]) seeded[p] = 1;
    });
  }
  std::vector<PixelIndex> seeds;
  for (PixelIndex p = 0; p < mask.size(); ++p)
    if (seeded[p]) seeds.push_back(p);
  Image<T> j = marker;
  const auto s = run_sequential(j, g, ReconstructionRule<T>{mask.data()}, seeds);
  if (stats != nullptr) *stats = s;
  return j;
}

/// Fast hybrid reconstruction: one raster and one anti-raster scan, then FIFO propagation
/// from the anti-raster seeds.
template <PixelType T>
Image<T> recon_fh(const Image<T>& mask, const Image<T>& marker, const StructuringElement& g,
                  PropagationStats* stats = nullptr) {
  check_recon_input(mask, marker);
  Image<T> j = marker;
  const Rect whole = Rect::whole(mask.dims());
  std::vector<PixelIndex> seeds;
  detail::scan_region(mask, j, g.half(ScanPhase::Raster), whole, true, nullptr);
  detail::scan_region(mask, j, g.half(ScanPhase::Antiraster), whole, false, &seeds);
  const auto s = run_sequential(j, g, ReconstructionRule<T>{mask.data()}, seeds);
  if (stats != nullptr) *stats = s;
  return j;
}

namespace detail {

/// One axis-decomposed scan. Row scans give each worker whole rows; column scans give each
/// worker a band of columns walked row by row, reading the neighbor band's edge racily
/// (hence relaxed atomics). Correctness does not depend on what those reads observe.
template <PixelType T>
void axis_scan(const Image<T>& mask, Image<T>& j, const StructuringElement& g, Axis axis, Direction dir,
               std::size_t n_workers) {
  const Dims dims = mask.dims();
  const Rect whole = Rect::whole(dims);
  const auto half = g.axis_half(axis, dir);
  const bool forward = dir == Direction::Forward;
  auto update = [&](int x, int y) {
    const PixelIndex p = dims.index({x, y});
    T v = atomic_load(j[p]);
    for_each_neighbor(half, x, y, whole, [&](int nx, int ny) { v = std::max(v, atomic_load(j(nx, ny))); });
    v = std::min(v, mask[p]);
    atomic_store(j[p], v);
  };
  if (axis == Axis::Row) {
    parallel_chunks(dims.height, n_workers, [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        if (forward) {
          for (int x = 0; x < dims.width; ++x) update(x, y);
        } else {
          for (int x = dims.width - 1; x >= 0; --x) update(x, y);
        }
      }
    });
  } else {
    parallel_chunks(dims.width, n_workers, [&](int x0, int x1) {
      if (forward) {
        for (int y = 0; y < dims.height; ++y)
          for (int x = x0; x < x1; ++x) update(x, y);
      } else {
        for (int y = dims.height - 1; y >= 0; --y)
          for (int x = x1 - 1; x >= x0; --x) update(x, y);
      }
    });
  }
}

}  // namespace detail

/// Parallel fast hybrid reconstruction: four axis-decomposed parallel scans, seeds taken from
/// the full neighborhood (the parallel scans do not leave the sequential invariant), then the
/// round-based parallel propagation with an atomic max merge.
template <PixelType T>
Image<T> recon_parallel(const Image<T>& mask, const Image<T>& marker, const StructuringElement& g,
                        const EngineConfig& cfg, PropagationStats* stats = nullptr) {
  check_recon_input(mask, marker);
  Image<T> j = marker;
  detail::axis_scan(mask, j, g, Axis::Row, Direction::Forward, cfg.n_workers);
  detail::axis_scan(mask, j, g, Axis::Col, Direction::Forward, cfg.n_workers);
  detail::axis_scan(mask, j, g, Axis::Row, Direction::Backward, cfg.n_workers);
  detail::axis_scan(mask, j, g, Axis::Col, Direction::Backward, cfg.n_workers);
  const ReconstructionRule<T> rule{mask.data()};
  const auto seeds = collect_active(j, g, rule, Rect::whole(mask.dims()), cfg.n_workers);
  const auto s = run_parallel(j, g, rule, seeds, cfg);
  if (stats != nullptr) *stats = s;
  return j;
}

/// Tiled reconstruction: each tile runs the fast hybrid algorithm on its own pixels, then
/// border propagation passes values between tiles until no tile changes.
template <PixelType T>
Image<T> recon_tiled(const Image<T>& mask, const Image<T>& marker, const StructuringElement& g,
                     const PipelineConfig& cfg, PipelineResult* run = nullptr) {
  check_recon_input(mask, marker);
  Image<T> j = marker;
  auto init_tile = [&](const Rect& r) {
    std::vector<PixelIndex> seeds;
    detail::scan_region(mask, j, g.half(ScanPhase::Raster), r, true, nullptr);
    detail::scan_region(mask, j, g.half(ScanPhase::Antiraster), r, false, &seeds);
    return seeds;
  };
  auto result = run_pipeline(j, g, ReconstructionRule<T>{mask.data()}, init_tile, cfg);
  if (run != nullptr) *run = std::move(result);
  return j;
}

}  // namespace iwpp
