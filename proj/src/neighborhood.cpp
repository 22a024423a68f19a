#include "iwpp/neighborhood.hpp"

namespace iwpp {

StructuringElement::StructuringElement(Connectivity c) : conn_(c) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) {
        raster_count_ = count_;
        continue;
      }
      if (c == Connectivity::Four && dx != 0 && dy != 0) continue;
      offsets_[count_++] = {dx, dy};
      if (dy == -1) ++row_above_count_;
    }
  }
}

StructuringElement StructuringElement::four() { return StructuringElement(Connectivity::Four); }
StructuringElement StructuringElement::eight() { return StructuringElement(Connectivity::Eight); }

StructuringElement StructuringElement::from_connectivity(int connectivity) {
  switch (connectivity) {
    case 4:
      return four();
    case 8:
      return eight();
    default:
      throw UsageError("connectivity must be 4 or 8");
  }
}

std::span<const Offset> StructuringElement::half(ScanPhase phase) const noexcept {
  if (phase == ScanPhase::Raster) return {offsets_.data(), raster_count_};
  return {offsets_.data() + raster_count_, count_ - raster_count_};
}

std::span<const Offset> StructuringElement::axis_half(Axis axis, Direction dir) const noexcept {
  // Raster half = [row above..., W]; antiraster half = [E, row below...].
  if (dir == Direction::Forward) {
    if (axis == Axis::Col) return {offsets_.data(), row_above_count_};
    return {offsets_.data() + row_above_count_, 1};
  }
  if (axis == Axis::Row) return {offsets_.data() + raster_count_, 1};
  return {offsets_.data() + raster_count_ + 1, count_ - raster_count_ - 1};
}

namespace {

std::vector<Coord> collect(Coord p, std::span<const Offset> offs, Dims dims) {
  if (!dims.contains(p)) throw UsageError("pixel out of bounds");
  std::vector<Coord> out;
  out.reserve(offs.size());
  for_each_neighbor(offs, p.x, p.y, Rect::whole(dims), [&](int x, int y) { out.push_back({x, y}); });
  return out;
}

}  // namespace

std::vector<Coord> neighbors(Coord p, const StructuringElement& g, Dims dims) {
  return collect(p, g.offsets(), dims);
}

std::vector<Coord> half_neighbors(Coord p, const StructuringElement& g, ScanPhase phase, Dims dims) {
  return collect(p, g.half(phase), dims);
}

std::vector<Coord> axis_half_neighbors(Coord p, const StructuringElement& g, Axis axis, Direction dir,
                                       Dims dims) {
  return collect(p, g.axis_half(axis, dir), dims);
}

}  // namespace iwpp
