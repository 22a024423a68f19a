#pragma once

#include <algorithm>
#include <cstdint>

#include "iwpp/image.hpp"

namespace iwpp {

/// Binary tissue-like mask: union of random axis-aligned ellipses, added until the
/// foreground fraction is within coverage_pct +/- 2 points. Deterministic per seed.
Image8 gen_synthetic_mask(int width, int height, int coverage_pct, std::uint64_t seed);

/// Smooth gray texture (value noise) inside a synthetic tissue mask, zero outside.
Image8 gen_gray_image(int width, int height, int coverage_pct, std::uint64_t seed);

/// Binary mask for distance transforms. Like gen_synthetic_mask, plus `holes` isolated
/// background pixels punched into the foreground so that full coverage still has a background.
Image8 gen_edt_mask(int width, int height, int coverage_pct, std::uint64_t seed, int holes);

/// marker(p) = max(mask(p) - h, 0)
template <PixelType T>
Image<T> gen_marker(const Image<T>& mask, T h) {
  Image<T> out(mask.dims());
  for (PixelIndex i = 0; i < mask.size(); ++i) out[i] = mask[i] > h ? static_cast<T>(mask[i] - h) : T{0};
  return out;
}

}  // namespace iwpp
