#pragma once

#include <array>
#include <span>
#include <vector>

#include "iwpp/image.hpp"

namespace iwpp {

struct Offset {
  int dx = 0;
  int dy = 0;

  friend constexpr bool operator==(const Offset&, const Offset&) = default;
};

enum class Connectivity { Four = 4, Eight = 8 };
enum class ScanPhase { Raster, Antiraster };
enum class Axis { Row, Col };
enum class Direction { Forward, Backward };

/// Square-grid structuring element G. Offsets are stored in raster order, so the raster
/// half-neighborhood N_G^+ is a prefix and the antiraster half N_G^- the matching suffix.
///
/// Axis decomposition used by the parallel scans:
///   row-forward  = {W}             col-forward  = the neighbors in the row above
///   row-backward = {E}             col-backward = the neighbors in the row below
class StructuringElement {
 public:
  static StructuringElement four();
  static StructuringElement eight();
  /// `connectivity` must be 4 or 8.
  static StructuringElement from_connectivity(int connectivity);

  Connectivity connectivity() const noexcept { return conn_; }
  std::span<const Offset> offsets() const noexcept { return {offsets_.data(), count_}; }
  std::span<const Offset> half(ScanPhase phase) const noexcept;
  std::span<const Offset> axis_half(Axis axis, Direction dir) const noexcept;

 private:
  explicit StructuringElement(Connectivity c);

  Connectivity conn_;
  std::array<Offset, 8> offsets_{};
  std::size_t count_ = 0;
  std::size_t raster_count_ = 0;    // offsets before (0,0) in raster order
  std::size_t row_above_count_ = 0;  // offsets with dy == -1
};

/// In-bounds neighbors of `p` in offset order. Throws UsageError if p is out of bounds.
std::vector<Coord> neighbors(Coord p, const StructuringElement& g, Dims dims);
std::vector<Coord> half_neighbors(Coord p, const StructuringElement& g, ScanPhase phase, Dims dims);
std::vector<Coord> axis_half_neighbors(Coord p, const StructuringElement& g, Axis axis, Direction dir,
                                       Dims dims);

/// Calls f(nx, ny) for each offset landing inside `region`.
template <typename F>
inline void for_each_neighbor(std::span<const Offset> offsets, int x, int y, const Rect& region, F&& f) {
  for (const Offset& o : offsets) {
    const int nx = x + o.dx;
    const int ny = y + o.dy;
    if (region.contains(nx, ny)) f(nx, ny);
  }
}

}  // namespace iwpp
