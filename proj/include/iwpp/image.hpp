#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "iwpp/errors.hpp"

namespace iwpp {

/// Linear row-major pixel index. Images are limited to 2^32 - 1 pixels.
using PixelIndex = std::uint32_t;

struct Coord {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

struct Dims {
  int width = 0;
  int height = 0;

  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  constexpr bool contains(Coord p) const noexcept {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
  constexpr PixelIndex index(Coord p) const noexcept {
    return static_cast<PixelIndex>(p.y) * static_cast<PixelIndex>(width) + static_cast<PixelIndex>(p.x);
  }
  constexpr Coord coord(PixelIndex i) const noexcept {
    return {static_cast<int>(i % static_cast<PixelIndex>(width)),
            static_cast<int>(i / static_cast<PixelIndex>(width))};
  }

  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

/// Axis-aligned pixel rectangle [x0, x0+width) x [y0, y0+height).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  static constexpr Rect whole(Dims d) noexcept { return {0, 0, d.width, d.height}; }

  constexpr int x1() const noexcept { return x0 + width; }
  constexpr int y1() const noexcept { return y0 + height; }
  constexpr std::size_t area() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  constexpr bool contains(int x, int y) const noexcept {
    return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height;
  }
  constexpr bool contains(Coord p) const noexcept { return contains(p.x, p.y); }
  constexpr bool on_ring(int x, int y) const noexcept {
    return x == x0 || y == y0 || x == x1() - 1 || y == y1() - 1;
  }

  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

enum class ElemKind { U8, U16, F32, Binary };

/// Foreground value of binary images (stored as u8).
inline constexpr std::uint8_t kBinaryOn = 255;

template <typename T>
constexpr ElemKind natural_kind() {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return ElemKind::U8;
  } else if constexpr (std::is_same_v<T, std::uint16_t>) {
    return ElemKind::U16;
  } else {
    static_assert(std::is_same_v<T, float>, "unsupported pixel type");
    return ElemKind::F32;
  }
}

template <typename T>
concept PixelType =
    std::is_same_v<T, std::uint8_t> || std::is_same_v<T, std::uint16_t> || std::is_same_v<T, float>;

/// Row-major 2-D grid. Holds gray images (u8/u16/f32), binary masks (u8 tagged binary),
/// and propagation state such as Voronoi maps.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{}) : dims_{width, height} {
    if (width <= 0 || height <= 0) throw UsageError("image dimensions must be positive");
    if (dims_.size() >= std::numeric_limits<PixelIndex>::max()) throw UsageError("image too large");
    data_.assign(dims_.size(), fill);
  }
  Image(Dims dims, T fill = T{}) : Image(dims.width, dims.height, fill) {}

  int width() const noexcept { return dims_.width; }
  int height() const noexcept { return dims_.height; }
  Dims dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept { return data_[dims_.index({x, y})]; }
  const T& operator()(int x, int y) const noexcept { return data_[dims_.index({x, y})]; }
  T& operator[](PixelIndex i) noexcept { return data_[i]; }
  const T& operator[](PixelIndex i) const noexcept { return data_[i]; }
  T& at(Coord p) {
    if (!dims_.contains(p)) throw UsageError("coordinate out of bounds");
    return (*this)(p.x, p.y);
  }
  const T& at(Coord p) const {
    if (!dims_.contains(p)) throw UsageError("coordinate out of bounds");
    return (*this)(p.x, p.y);
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  /// Binary tagging only applies to u8 images whose pixels are all 0 or kBinaryOn.
  ElemKind kind() const
    requires PixelType<T>
  {
    return binary_ ? ElemKind::Binary : natural_kind<T>();
  }
  void mark_binary(bool on = true)
    requires std::is_same_v<T, std::uint8_t>
  {
    binary_ = on;
  }

  /// Equality compares geometry and pixels; the binary tag is a view, not data.
  friend bool operator==(const Image& a, const Image& b) { return a.dims_ == b.dims_ && a.data_ == b.data_; }

 private:
  Dims dims_{};
  std::vector<T> data_;
  bool binary_ = false;
};

using Image8 = Image<std::uint8_t>;
using Image16 = Image<std::uint16_t>;
using ImageF = Image<float>;

/// Binary mask with every pixel set to `foreground ? kBinaryOn : 0`.
inline Image8 make_binary(int width, int height, bool foreground) {
  Image8 img(width, height, foreground ? kBinaryOn : std::uint8_t{0});
  img.mark_binary();
  return img;
}

inline bool is_binary_valued(const Image8& img) {
  return std::all_of(img.pixels().begin(), img.pixels().end(),
                     [](std::uint8_t v) { return v == 0 || v == kBinaryOn; });
}

}  // namespace iwpp
