#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iwpp/image.hpp"

namespace iwpp {

using Bytes = std::vector<std::uint8_t>;
using PixelImage = std::variant<Image8, Image16, ImageF>;

/// Parses P2 (ASCII) or P5 (binary) PGM. maxval < 256 yields u8, otherwise u16 (big-endian
/// samples). maxval == 1 yields a binary image with samples scaled to {0, kBinaryOn}.
/// Throws ParseError carrying the byte offset of the problem.
PixelImage read_pgm(std::span<const std::uint8_t> bytes);

/// Canonical P5: u8 and binary with maxval 255, u16 with maxval 65535.
/// f32 images are rejected with UsageError (use write_f32_raw).
Bytes write_pgm(const PixelImage& img);

struct F32Raw {
  Bytes payload;       ///< row-major little-endian floats
  std::string header;  ///< "{width} {height} f32le"
};

F32Raw write_f32_raw(const ImageF& img);
/// Throws ParseError on a malformed header or a payload whose size disagrees with it.
ImageF read_f32_raw(std::span<const std::uint8_t> payload, std::string_view header);

/// Distance map quantized to u8: round(min(d, 255)).
Image8 quantize_distance(const ImageF& distance);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Sidecar path for an .f32 payload: "<path>.hdr".
std::filesystem::path f32_header_path(const std::filesystem::path& payload_path);

}  // namespace iwpp
