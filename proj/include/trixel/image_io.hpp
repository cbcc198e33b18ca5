#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trixel/error.hpp"
#include "trixel/image.hpp"

// Minimal PNG support on top of zlib: 8-bit grayscale, 8-bit RGB and 16-bit
// grayscale, non-interlaced. Everything else (palettes, alpha, interlacing)
// is rejected on read. Binary PPM/PGM round out the lossless formats.

namespace trixel {
namespace pngio {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 8;   // 8 or 16
  int channels = 1;    // 1 (gray) or 3 (rgb)
  std::vector<std::uint8_t> bytes;  // unfiltered scanline data, 16-bit is big-endian
};

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::uint8_t* data, std::size_t len) {
  put_u32(out, std::uint32_t(len));
  std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data, data + len);
  std::uint32_t crc = std::uint32_t(
      ::crc32(0, reinterpret_cast<const Bytef*>(out.data() + start), uInt(4 + len)));
  put_u32(out, crc);
}

inline std::vector<std::uint8_t> zlib_compress(const std::vector<std::uint8_t>& in) {
  uLongf bound = ::compressBound(uLong(in.size()));
  std::vector<std::uint8_t> out(bound);
  int rc = ::compress2(out.data(), &bound, in.data(), uLong(in.size()), 6);
  require(rc == Z_OK, Errc::IoFailure, "zlib compression failed");
  out.resize(bound);
  return out;
}

inline std::vector<std::uint8_t> zlib_decompress(const std::vector<std::uint8_t>& in,
                                                 std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf len = uLongf(expected);
  int rc = ::uncompress(out.data(), &len, in.data(), uLong(in.size()));
  require(rc == Z_OK && len == expected, Errc::BadFormat, "corrupt PNG stream");
  return out;
}

inline std::vector<std::uint8_t> encode(const RawImage& img) {
  std::vector<std::uint8_t> out(kSignature, kSignature + 8);

  std::uint8_t ihdr[13];
  ihdr[0] = std::uint8_t(img.width >> 24);
  ihdr[1] = std::uint8_t(img.width >> 16);
  ihdr[2] = std::uint8_t(img.width >> 8);
  ihdr[3] = std::uint8_t(img.width);
  ihdr[4] = std::uint8_t(img.height >> 24);
  ihdr[5] = std::uint8_t(img.height >> 16);
  ihdr[6] = std::uint8_t(img.height >> 8);
  ihdr[7] = std::uint8_t(img.height);
  ihdr[8] = std::uint8_t(img.bit_depth);
  ihdr[9] = std::uint8_t(img.channels == 3 ? 2 : 0);
  ihdr[10] = 0;  // deflate
  ihdr[11] = 0;  // adaptive filtering
  ihdr[12] = 0;  // no interlace
  append_chunk(out, "IHDR", ihdr, 13);

  std::size_t stride = std::size_t(img.width) * img.channels * (img.bit_depth / 8);
  std::vector<std::uint8_t> filtered;
  filtered.reserve((stride + 1) * img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    filtered.push_back(0);  // filter type None
    const std::uint8_t* row = img.bytes.data() + y * stride;
    filtered.insert(filtered.end(), row, row + stride);
  }
  std::vector<std::uint8_t> idat = zlib_compress(filtered);
  append_chunk(out, "IDAT", idat.data(), idat.size());
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

inline int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

inline RawImage decode(const std::vector<std::uint8_t>& file, const std::string& origin) {
  require(file.size() > 8 && std::memcmp(file.data(), kSignature, 8) == 0, Errc::BadFormat,
          origin + ": not a PNG file");
  RawImage img;
  std::vector<std::uint8_t> idat;
  bool have_ihdr = false;
  std::size_t pos = 8;
  while (pos + 8 <= file.size()) {
    std::uint32_t len = get_u32(file.data() + pos);
    require(pos + 12 + len <= file.size(), Errc::BadFormat, origin + ": truncated PNG");
    const char* type = reinterpret_cast<const char*>(file.data() + pos + 4);
    const std::uint8_t* data = file.data() + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      require(len == 13, Errc::BadFormat, origin + ": bad IHDR");
      img.width = get_u32(data);
      img.height = get_u32(data + 4);
      img.bit_depth = data[8];
      int color_type = data[9];
      require(data[12] == 0, Errc::BadFormat, origin + ": interlaced PNG unsupported");
      require((color_type == 0 && (img.bit_depth == 8 || img.bit_depth == 16)) ||
                  (color_type == 2 && img.bit_depth == 8),
              Errc::BadFormat,
              origin + ": only 8-bit gray/RGB and 16-bit gray PNGs are supported");
      img.channels = color_type == 2 ? 3 : 1;
      have_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  require(have_ihdr && !idat.empty() && img.width > 0 && img.height > 0, Errc::BadFormat,
          origin + ": incomplete PNG");

  std::size_t bpp = std::size_t(img.channels) * (img.bit_depth / 8);
  std::size_t stride = std::size_t(img.width) * bpp;
  std::vector<std::uint8_t> raw = zlib_decompress(idat, (stride + 1) * img.height);

  img.bytes.assign(stride * img.height, 0);
  std::vector<std::uint8_t> prev(stride, 0);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    const std::uint8_t* src = raw.data() + y * (stride + 1);
    std::uint8_t filter = src[0];
    ++src;
    std::uint8_t* dst = img.bytes.data() + y * stride;
    for (std::size_t i = 0; i < stride; ++i) {
      int a = i >= bpp ? dst[i - bpp] : 0;
      int b = prev[i];
      int c = i >= bpp ? prev[i - bpp] : 0;
      int x = src[i];
      switch (filter) {
        case 0: dst[i] = std::uint8_t(x); break;
        case 1: dst[i] = std::uint8_t(x + a); break;
        case 2: dst[i] = std::uint8_t(x + b); break;
        case 3: dst[i] = std::uint8_t(x + (a + b) / 2); break;
        case 4: dst[i] = std::uint8_t(x + paeth(a, b, c)); break;
        default: fail(Errc::BadFormat, origin + ": unknown PNG filter");
      }
    }
    std::memcpy(prev.data(), dst, stride);
  }
  return img;
}

}  // namespace pngio

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), Errc::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::string& path, const std::uint8_t* data, std::size_t len) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data), std::streamsize(len));
  require(bool(out), Errc::IoFailure, "short write to " + path);
}

inline std::uint8_t to_byte(double v) {
  return std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
}

inline bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace detail

inline void write_png(const std::string& path, const RgbImage& img) {
  pngio::RawImage raw;
  raw.width = std::uint32_t(img.width);
  raw.height = std::uint32_t(img.height);
  raw.channels = 3;
  raw.bytes.resize(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i)
    raw.bytes[i] = detail::to_byte(img.data[i]);
  auto bytes = pngio::encode(raw);
  detail::write_file(path, bytes.data(), bytes.size());
}

inline void write_png(const std::string& path, const Mask& m) {
  pngio::RawImage raw;
  raw.width = std::uint32_t(m.width);
  raw.height = std::uint32_t(m.height);
  raw.channels = 1;
  raw.bytes.assign(m.values.begin(), m.values.end());
  auto bytes = pngio::encode(raw);
  detail::write_file(path, bytes.data(), bytes.size());
}

/// 8-bit gray PNG from a scalar field (values clamped to [0,255]).
inline void write_png_gray(const std::string& path, const ScalarField& f) {
  pngio::RawImage raw;
  raw.width = std::uint32_t(f.width);
  raw.height = std::uint32_t(f.height);
  raw.channels = 1;
  raw.bytes.resize(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i)
    raw.bytes[i] = detail::to_byte(f.values[i]);
  auto bytes = pngio::encode(raw);
  detail::write_file(path, bytes.data(), bytes.size());
}

/// 16-bit gray PNG; field values are expected in [0, 1] (value = v * 65535).
inline void write_png_gray16(const std::string& path, const ScalarField& f) {
  pngio::RawImage raw;
  raw.width = std::uint32_t(f.width);
  raw.height = std::uint32_t(f.height);
  raw.channels = 1;
  raw.bit_depth = 16;
  raw.bytes.resize(f.values.size() * 2);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    long v = std::lround(std::clamp(f.values[i], 0.0, 1.0) * 65535.0);
    raw.bytes[2 * i] = std::uint8_t(v >> 8);
    raw.bytes[2 * i + 1] = std::uint8_t(v & 0xff);
  }
  auto bytes = pngio::encode(raw);
  detail::write_file(path, bytes.data(), bytes.size());
}

inline RgbImage read_image(const std::string& path) {
  auto file = detail::read_file(path);
  RgbImage img;
  if (file.size() >= 2 && file[0] == 'P' && (file[1] == '5' || file[1] == '6')) {
    // binary PGM/PPM
    std::size_t pos = 2;
    auto next_int = [&]() -> long {
      while (pos < file.size()) {
        if (std::isspace(file[pos])) { ++pos; continue; }
        if (file[pos] == '#') { while (pos < file.size() && file[pos] != '\n') ++pos; continue; }
        break;
      }
      long v = 0;
      bool any = false;
      while (pos < file.size() && std::isdigit(file[pos])) {
        v = v * 10 + (file[pos] - '0');
        ++pos;
        any = true;
      }
      require(any, Errc::BadFormat, path + ": malformed PNM header");
      return v;
    };
    bool rgb = file[1] == '6';
    long w = next_int(), h = next_int(), maxval = next_int();
    require(w > 0 && h > 0 && maxval == 255, Errc::BadFormat, path + ": only maxval 255 PNM");
    ++pos;  // single whitespace after header
    std::size_t need = std::size_t(w) * h * (rgb ? 3 : 1);
    require(file.size() - pos >= need, Errc::BadFormat, path + ": truncated PNM");
    img = RgbImage(int(w), int(h));
    for (std::size_t i = 0; i < std::size_t(w) * h; ++i) {
      if (rgb) {
        img.data[3 * i] = file[pos + 3 * i];
        img.data[3 * i + 1] = file[pos + 3 * i + 1];
        img.data[3 * i + 2] = file[pos + 3 * i + 2];
      } else {
        double v = file[pos + i];
        img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = v;
      }
    }
    return img;
  }
  pngio::RawImage raw = pngio::decode(file, path);
  require(raw.bit_depth == 8, Errc::BadFormat, path + ": expected an 8-bit image");
  img = RgbImage(int(raw.width), int(raw.height));
  std::size_t n = std::size_t(raw.width) * raw.height;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw.channels == 3) {
      img.data[3 * i] = raw.bytes[3 * i];
      img.data[3 * i + 1] = raw.bytes[3 * i + 1];
      img.data[3 * i + 2] = raw.bytes[3 * i + 2];
    } else {
      double v = raw.bytes[i];
      img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = v;
    }
  }
  return img;
}

inline void write_image(const std::string& path, const RgbImage& img) {
  if (detail::has_suffix(path, ".ppm")) {
    std::string header = "P6\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (double v : img.data) bytes.push_back(detail::to_byte(v));
    detail::write_file(path, bytes.data(), bytes.size());
    return;
  }
  if (detail::has_suffix(path, ".pgm")) {
    std::string header = "P5\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      const double* p = img.data.data() + 3 * i;
      bytes.push_back(detail::to_byte(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
    }
    detail::write_file(path, bytes.data(), bytes.size());
    return;
  }
  write_png(path, img);
}

/// Masks are 8-bit gray PNGs holding exactly {0, 255}; anything else is an
/// error on read.
inline Mask read_mask(const std::string& path) {
  auto file = detail::read_file(path);
  pngio::RawImage raw = pngio::decode(file, path);
  require(raw.channels == 1 && raw.bit_depth == 8, Errc::BadFormat,
          path + ": mask must be 8-bit grayscale");
  Mask m(int(raw.width), int(raw.height));
  for (std::size_t i = 0; i < raw.bytes.size(); ++i) {
    std::uint8_t v = raw.bytes[i];
    require(v == 0 || v == 255, Errc::BadFormat, path + ": mask values must be 0 or 255");
    m.values[i] = v;
  }
  return m;
}

/// 16-bit gray PNG to a [0, 1] scalar field.
inline ScalarField read_png_gray16(const std::string& path) {
  auto file = detail::read_file(path);
  pngio::RawImage raw = pngio::decode(file, path);
  require(raw.channels == 1 && raw.bit_depth == 16, Errc::BadFormat,
          path + ": expected 16-bit grayscale PNG");
  ScalarField f(int(raw.width), int(raw.height));
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    unsigned v = (unsigned(raw.bytes[2 * i]) << 8) | raw.bytes[2 * i + 1];
    f.values[i] = double(v) / 65535.0;
  }
  return f;
}

/// Eye sidecar: JSON `{"left":[x,y],"right":[x,y]}` next to the image.
inline EyePair read_eyes(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), Errc::IoFailure, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::BadFormat, path + ": " + e.what());
  }
  require(j.contains("left") && j.contains("right") && j["left"].size() == 2 &&
              j["right"].size() == 2,
          Errc::BadFormat, path + ": expected {\"left\":[x,y],\"right\":[x,y]}");
  EyePair eyes;
  eyes.left = {j["left"][0].get<double>(), j["left"][1].get<double>()};
  eyes.right = {j["right"][0].get<double>(), j["right"][1].get<double>()};
  return eyes;
}

inline void write_eyes(const std::string& path, const EyePair& eyes) {
  nlohmann::json j;
  j["left"] = {eyes.left.x, eyes.left.y};
  j["right"] = {eyes.right.x, eyes.right.y};
  std::ofstream out(path, std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace trixel
