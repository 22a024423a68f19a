#include "iwpp/synthetic.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace iwpp {

namespace {

std::size_t paint_ellipse(Image8& img, int cx, int cy, int rx, int ry) {
  std::size_t added = 0;
  for (int y = std::max(0, cy - ry); y <= std::min(img.height() - 1, cy + ry); ++y) {
    for (int x = std::max(0, cx - rx); x <= std::min(img.width() - 1, cx + rx); ++x) {
      const double u = static_cast<double>(x - cx) / (rx + 0.5);
      const double v = static_cast<double>(y - cy) / (ry + 0.5);
      if (u * u + v * v <= 1.0 && img(x, y) == 0) {
        img(x, y) = kBinaryOn;
        ++added;
      }
    }
  }
  return added;
}

}  // namespace

Image8 gen_synthetic_mask(int width, int height, int coverage_pct, std::uint64_t seed) {
  if (coverage_pct < 0 || coverage_pct > 100) throw UsageError("coverage must be in 0..100");
  Image8 img = make_binary(width, height, coverage_pct == 100);
  if (coverage_pct == 0 || coverage_pct == 100) return img;

  std::mt19937_64 rng(seed);
  const auto total = static_cast<double>(img.size());
  const auto lo = static_cast<std::size_t>(std::ceil(total * (coverage_pct - 2) / 100.0));
  const auto hi = static_cast<std::size_t>(std::floor(total * (coverage_pct + 2) / 100.0));
  const auto target = static_cast<std::size_t>(total * coverage_pct / 100.0);
  const int max_r = std::max(1, std::min(width, height) / 5);
  std::size_t covered = 0;
  while (covered < std::max<std::size_t>(lo, 1)) {
    // Centers are drawn from uncovered pixels so every ellipse makes progress.
    std::uniform_int_distribution<PixelIndex> pick(0, static_cast<PixelIndex>(img.size() - 1));
    PixelIndex c = pick(rng);
    while (img[c] != 0) c = (c + 1) % static_cast<PixelIndex>(img.size());
    const Coord at = img.dims().coord(c);
    const double room = std::sqrt(static_cast<double>(target - std::min(target, covered)) / 3.14159);
    int limit = std::clamp(static_cast<int>(room), 1, max_r);
    std::uniform_int_distribution<int> radius(std::max(1, limit / 3), limit);
    int rx = radius(rng);
    int ry = radius(rng);
    for (;;) {
      Image8 trial = img;
      const std::size_t added = paint_ellipse(trial, at.x, at.y, rx, ry);
      if (covered + added <= hi || (rx == 0 && ry == 0)) {
        img = std::move(trial);
        covered += added;
        break;
      }
      rx /= 2;
      ry /= 2;
    }
  }
  return img;
}

Image8 gen_gray_image(int width, int height, int coverage_pct, std::uint64_t seed) {
  Image8 img = gen_synthetic_mask(width, height, coverage_pct, seed);
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  constexpr int kCell = 16;
  const int gw = width / kCell + 2;
  const int gh = height / kCell + 2;
  std::uniform_real_distribution<double> lattice_value(16.0, 255.0);
  std::vector<double> lattice(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh));
  for (double& v : lattice) v = lattice_value(rng);
  std::uniform_int_distribution<int> jitter(-12, 12);
  auto at = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int gx = x / kCell;
      const int gy = y / kCell;
      const double fx = static_cast<double>(x % kCell) / kCell;
      const double fy = static_cast<double>(y % kCell) / kCell;
      const double top = at(gx, gy) * (1 - fx) + at(gx + 1, gy) * fx;
      const double bottom = at(gx, gy + 1) * (1 - fx) + at(gx + 1, gy + 1) * fx;
      const double v = top * (1 - fy) + bottom * fy + jitter(rng);
      if (img(x, y) != 0) img(x, y) = static_cast<std::uint8_t>(std::clamp(v, 1.0, 255.0));
    }
  }
  img.mark_binary(false);
  return img;
}

Image8 gen_edt_mask(int width, int height, int coverage_pct, std::uint64_t seed, int holes) {
  Image8 img = gen_synthetic_mask(width, height, coverage_pct, seed);
  std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ull);
  std::uniform_int_distribution<int> px(0, width - 1);
  std::uniform_int_distribution<int> py(0, height - 1);
  for (int i = 0; i < holes; ++i) img(px(rng), py(rng)) = 0;
  return img;
}

}  // namespace iwpp
