#include "iwpp/pgm.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace iwpp {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const noexcept { return pos_; }
  void skip(std::size_t n) noexcept { pos_ += n; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul) throw ParseError(std::string(what) + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size()) throw ParseError(std::string("unexpected end of data reading ") + what, pos_);
      throw ParseError(std::string("expected ") + what, pos_);
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
T fetch(std::span<const std::uint8_t> payload, std::size_t i, bool wide) {
  if (wide) return static_cast<T>((payload[2 * i] << 8) | payload[2 * i + 1]);
  return static_cast<T>(payload[i]);
}

template <typename T>
PixelImage finish(Image<T> img, unsigned long maxval) {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    if (maxval == 1) {
      for (auto& v : img.pixels()) v = v != 0 ? kBinaryOn : 0;
      img.mark_binary();
    }
  }
  return img;
}

template <typename T>
PixelImage decode(std::span<const std::uint8_t> bytes, HeaderReader& rd, bool ascii, int w, int h,
                  unsigned long maxval) {
  Image<T> img(w, h);
  const std::size_t n = img.size();
  if (ascii) {
    for (std::size_t i = 0; i < n; ++i) {
      rd.skip_space_and_comments();
      const std::size_t at = rd.pos();
      const unsigned long v = rd.number("sample");
      if (v > maxval) throw ParseError("sample exceeds maxval", at);
      img[static_cast<PixelIndex>(i)] = static_cast<T>(v);
    }
    return finish(std::move(img), maxval);
  }
  // Exactly one whitespace byte separates maxval from the raster.
  if (rd.pos() >= bytes.size() || !std::isspace(bytes[rd.pos()]))
    throw ParseError("expected whitespace before raster", rd.pos());
  rd.skip(1);
  const bool wide = maxval > 255;
  const std::size_t expected = n * (wide ? 2 : 1);
  const std::size_t actual = bytes.size() - rd.pos();
  if (actual < expected) {
    throw ParseError("truncated raster: expected " + std::to_string(expected) + " bytes, found " + std::to_string(actual),
                     bytes.size());
  }
  const auto payload = bytes.subspan(rd.pos(), expected);
  for (std::size_t i = 0; i < n; ++i) {
    const T v = fetch<T>(payload, i, wide);
    if (v > maxval) throw ParseError("sample exceeds maxval", rd.pos() + i * (wide ? 2 : 1));
    img[static_cast<PixelIndex>(i)] = v;
  }
  return finish(std::move(img), maxval);
}

}  // namespace

PixelImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("not a PGM file (expected magic P2 or P5)", 0);
  const bool ascii = bytes[1] == '2';
  HeaderReader rd(bytes);
  rd.skip(2);
  rd.skip_space_and_comments();
  const std::size_t wpos = rd.pos();
  const unsigned long w = rd.number("width");
  const unsigned long h = rd.number("height");
  if (w == 0 || h == 0) throw ParseError("image dimensions must be positive", wpos);
  if (w > 0x7FFFFFFFul || h > 0x7FFFFFFFul || w * h >= 0xFFFFFFFFul) throw ParseError("image too large", wpos);
  rd.skip_space_and_comments();
  const std::size_t mpos = rd.pos();
  const unsigned long maxval = rd.number("maxval");
  if (maxval < 1 || maxval > 65535) throw ParseError("maxval out of range 1..65535", mpos);
  if (maxval < 256)
    return decode<std::uint8_t>(bytes, rd, ascii, static_cast<int>(w), static_cast<int>(h), maxval);
  return decode<std::uint16_t>(bytes, rd, ascii, static_cast<int>(w), static_cast<int>(h), maxval);
}

Bytes write_pgm(const PixelImage& img) {
  return std::visit(
      [](const auto& im) -> Bytes {
        using T = typename std::decay_t<decltype(im)>::value_type;
        if constexpr (std::is_same_v<T, float>) {
          throw UsageError("f32 images cannot be written as PGM; use the f32 raw format");
        } else {
          constexpr bool wide = std::is_same_v<T, std::uint16_t>;
          const std::string header = "P5\n" + std::to_string(im.width()) + " " + std::to_string(im.height()) + "\n" +
                                     (wide ? "65535" : "255") + "\n";
          Bytes out(header.begin(), header.end());
          out.reserve(out.size() + im.size() * (wide ? 2 : 1));
          for (const T v : im.pixels()) {
            if constexpr (wide) out.push_back(static_cast<std::uint8_t>(v >> 8));
            out.push_back(static_cast<std::uint8_t>(v & 0xFF));
          }
          return out;
        }
      },
      img);
}

F32Raw write_f32_raw(const ImageF& img) {
  F32Raw out;
  out.header = std::to_string(img.width()) + " " + std::to_string(img.height()) + " f32le";
  out.payload.resize(img.size() * 4);
  for (std::size_t i = 0; i < img.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(img[static_cast<PixelIndex>(i)]);
    for (int b = 0; b < 4; ++b) out.payload[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

ImageF read_f32_raw(std::span<const std::uint8_t> payload, std::string_view header) {
  std::istringstream in{std::string(header)};
  long long w = 0;
  long long h = 0;
  std::string tag;
  if (!(in >> w >> h >> tag) || tag != "f32le" || w <= 0 || h <= 0)
    throw ParseError("malformed f32 header, expected \"{width} {height} f32le\"", 0);
  const auto expected = static_cast<std::size_t>(w * h * 4);
  if (payload.size() != expected) {
    throw ParseError("f32 payload size mismatch: header implies " + std::to_string(expected) + " bytes, found " +
                         std::to_string(payload.size()),
                     std::min(payload.size(), expected));
  }
  ImageF img(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < img.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(payload[4 * i + b]) << (8 * b);
    img[static_cast<PixelIndex>(i)] = std::bit_cast<float>(bits);
  }
  return img;
}

Image8 quantize_distance(const ImageF& distance) {
  Image8 out(distance.dims());
  for (PixelIndex i = 0; i < distance.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::lround(std::min(distance[i], 255.0f)));
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::filesystem::path f32_header_path(const std::filesystem::path& payload_path) {
  return std::filesystem::path(payload_path.string() + ".hdr");
}

}  // namespace iwpp
