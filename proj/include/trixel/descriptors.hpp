#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trixel/error.hpp"
#include "trixel/image.hpp"

namespace trixel {

enum class PatternKind { Face, HeadShoulders, Clothes };

inline std::pair<int, int> canonical_size(PatternKind kind) {
  switch (kind) {
    case PatternKind::Face: return {59, 65};
    case PatternKind::HeadShoulders: return {64, 64};
    case PatternKind::Clothes: return {64, 64};
  }
  return {64, 64};
}

/// Grayscale pattern at its canonical size, masked-out pixels filled with
/// mid-gray so mask borders do not spawn spurious gradients.
struct PatternInput {
  ScalarField image;
  PatternKind kind = PatternKind::HeadShoulders;
};

struct Bbox {
  int x = 0, y = 0, width = 0, height = 0;
};

struct DescriptorLayout {
  std::string kind;  // "lbp", "hog" or "concat"
  // lbp
  int grid = 0;
  int bins = 0;
  // hog
  int cell = 0;
  int block = 0;
  int stride = 0;
  int cells_x = 0, cells_y = 0;
  int blocks_x = 0, blocks_y = 0;
  std::size_t length = 0;
  std::vector<DescriptorLayout> parts;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["length"] = length;
    if (kind == "lbp") {
      j["grid"] = grid;
      j["bins"] = bins;
      j["sampling"] = "raw-3x3";
      j["order"] = "top-left-clockwise";
      j["threshold"] = "neighbor>=center";
      j["bit0"] = "msb";
    } else if (kind == "hog") {
      j["cell_px"] = cell;
      j["bins"] = bins;
      j["block_cells"] = block;
      j["stride_cells"] = stride;
      j["cells"] = {cells_x, cells_y};
      j["blocks"] = {blocks_x, blocks_y};
      j["orientation"] = "unsigned-180";
      j["bin_centers_deg"] = "k*20, vertical edge (horizontal gradient) votes bin 0";
      j["normalization"] = "l2-hys(0.2)";
    } else if (kind == "concat") {
      for (const DescriptorLayout& p : parts) j["parts"].push_back(p.to_json());
    }
    return j;
  }
};

inline bool layout_compatible(const DescriptorLayout& a, const DescriptorLayout& b) {
  return a.kind == b.kind && a.length == b.length;
}

struct Descriptor {
  std::vector<double> values;
  DescriptorLayout layout;
};

namespace detail {

inline ScalarField resize_bilinear(const ScalarField& in, int out_w, int out_h) {
  if (in.width == out_w && in.height == out_h) return in;
  ScalarField out(out_w, out_h);
  double sx = double(in.width) / out_w;
  double sy = double(in.height) / out_h;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      double u = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(in.width - 1));
      double v = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(in.height - 1));
      out.at(x, y) = bilinear(in, u, v);
    }
  return out;
}

inline Bbox mask_bbox(const Mask& m) {
  int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  require(x1 >= 0, Errc::EmptyMask, "mask has no foreground pixels");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace detail

constexpr double kMaskFill = 128.0;

/// Crop (mask bounding box for clothes, caller box or full frame otherwise),
/// convert to grayscale, fill masked-out pixels, and resize to the pattern's
/// canonical size.
inline PatternInput prepare_pattern(const RgbImage& img, const Mask* mask, PatternKind kind,
                                    const Bbox* bbox = nullptr) {
  if (kind == PatternKind::Clothes)
    require(mask != nullptr, Errc::EmptyMask, "clothes pattern needs a mask");
  Bbox box;
  if (bbox) {
    box = *bbox;
    require(box.width > 0 && box.height > 0 && box.x >= 0 && box.y >= 0 &&
                box.x + box.width <= img.width && box.y + box.height <= img.height,
            Errc::BboxOutOfRange, "bbox outside image");
  } else if (kind == PatternKind::Clothes) {
    box = detail::mask_bbox(*mask);
  } else {
    box = {0, 0, img.width, img.height};
  }
  if (mask)
    require(mask->width == img.width && mask->height == img.height, Errc::DimMismatch,
            "mask dimensions do not match image");

  ScalarField gray(box.width, box.height);
  for (int y = 0; y < box.height; ++y)
    for (int x = 0; x < box.width; ++x) {
      int sx = box.x + x, sy = box.y + y;
      if (mask && !mask->at(sx, sy)) {
        gray.at(x, y) = kMaskFill;
      } else {
        const double* p = img.px(sx, sy);
        gray.at(x, y) = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
      }
    }

  auto [cw, ch] = canonical_size(kind);
  return {detail::resize_bilinear(gray, cw, ch), kind};
}

/// Basic 8-neighbor LBP codes over `grid` x `grid` cells. Neighbors are the
/// raw 3x3 ring read from the top-left corner clockwise; bit n is set when
/// that neighbor is >= the center, and bit 0 is the most significant bit of
/// the code. Raw sampling keeps the codes exactly invariant under any
/// strictly increasing intensity transform.
inline Descriptor lbp_descriptor(const PatternInput& p, int grid = 5) {
  const ScalarField& f = p.image;
  require(f.width >= 3 && f.height >= 3, Errc::ImageTooSmall, "lbp needs at least 3x3");
  require(grid >= 1, Errc::BadFormat, "grid must be positive");

  static constexpr int kOffsets[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {1, 0},
                                         {1, 1},   {0, 1},  {-1, 1}, {-1, 0}};
  const int cell_w = std::max(1, f.width / grid);
  const int cell_h = std::max(1, f.height / grid);

  Descriptor out;
  out.layout.kind = "lbp";
  out.layout.grid = grid;
  out.layout.bins = 256;
  out.layout.length = std::size_t(grid) * grid * 256;
  out.values.assign(out.layout.length, 0.0);

  for (int y = 1; y < f.height - 1; ++y)
    for (int x = 1; x < f.width - 1; ++x) {
      double c = f.at(x, y);
      unsigned code = 0;
      for (int n = 0; n < 8; ++n)
        if (f.at(x + kOffsets[n][0], y + kOffsets[n][1]) >= c) code |= 1u << (7 - n);
      int cx = std::min(grid - 1, x / cell_w);
      int cy = std::min(grid - 1, y / cell_h);
      out.values[(std::size_t(cy) * grid + cx) * 256 + code] += 1.0;
    }
  return out;
}

/// Dalal-Triggs style HOG: centered differences, unsigned orientations in
/// [0, 180) with linear vote splitting between the two nearest bin centers
/// (centers at k * 180/bins degrees), cell histograms, 2x2-cell blocks at
/// stride 1 with L2-hys normalization, concatenated row-major.
inline Descriptor hog_descriptor(const PatternInput& p, int cell = 8, int bins = 9,
                                 int block = 2, int stride = 1) {
  const ScalarField& f = p.image;
  require(f.width >= block * cell && f.height >= block * cell, Errc::ImageTooSmall,
          "hog needs at least one block");
  require(cell >= 1 && bins >= 2 && block >= 1 && stride >= 1, Errc::BadFormat,
          "bad hog parameters");

  const int nx = f.width / cell, ny = f.height / cell;
  const int bx = (nx - block) / stride + 1, by = (ny - block) / stride + 1;

  std::vector<double> hist(std::size_t(nx) * ny * bins, 0.0);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      double gx = (detail::clamped(f, x + 1, y) - detail::clamped(f, x - 1, y)) * 0.5;
      double gy = (detail::clamped(f, x, y + 1) - detail::clamped(f, x, y - 1)) * 0.5;
      double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += 3.14159265358979323846;
      double t = theta / 3.14159265358979323846 * bins;
      int k0 = int(std::floor(t));
      double frac = t - k0;
      k0 %= bins;
      int k1 = (k0 + 1) % bins;
      int cx = std::min(nx - 1, x / cell);
      int cy = std::min(ny - 1, y / cell);
      double* h = hist.data() + (std::size_t(cy) * nx + cx) * bins;
      h[k0] += mag * (1.0 - frac);
      h[k1] += mag * frac;
    }

  Descriptor out;
  out.layout.kind = "hog";
  out.layout.cell = cell;
  out.layout.bins = bins;
  out.layout.block = block;
  out.layout.stride = stride;
  out.layout.cells_x = nx;
  out.layout.cells_y = ny;
  out.layout.blocks_x = bx;
  out.layout.blocks_y = by;
  out.layout.length = std::size_t(bx) * by * block * block * bins;
  out.values.reserve(out.layout.length);

  const double eps = 1e-6;
  std::vector<double> blockv(std::size_t(block) * block * bins);
  for (int yb = 0; yb < by; ++yb)
    for (int xb = 0; xb < bx; ++xb) {
      std::size_t k = 0;
      for (int dy = 0; dy < block; ++dy)
        for (int dx = 0; dx < block; ++dx) {
          const double* h =
              hist.data() + (std::size_t(yb * stride + dy) * nx + (xb * stride + dx)) * bins;
          for (int b = 0; b < bins; ++b) blockv[k++] = h[b];
        }
      double norm2 = 0.0;
      for (double v : blockv) norm2 += v * v;
      double inv = 1.0 / std::sqrt(norm2 + eps * eps);
      for (double& v : blockv) v = std::min(v * inv, 0.2);
      norm2 = 0.0;
      for (double v : blockv) norm2 += v * v;
      inv = 1.0 / std::sqrt(norm2 + eps * eps);
      for (double v : blockv) out.values.push_back(v * inv);
    }
  return out;
}

inline Descriptor concat(const std::vector<Descriptor>& parts) {
  require(!parts.empty(), Errc::LengthMismatch, "concat needs at least one descriptor");
  if (parts.size() == 1) return parts[0];
  Descriptor out;
  out.layout.kind = "concat";
  for (const Descriptor& d : parts) {
    out.values.insert(out.values.end(), d.values.begin(), d.values.end());
    out.layout.parts.push_back(d.layout);
    out.layout.length += d.layout.length;
  }
  return out;
}

/// CSV: one row per pattern, id first, then the values. The layout goes to a
/// JSON header file next to it.
inline void write_descriptors_csv(const std::string& path, const std::vector<std::string>& ids,
                                  const std::vector<Descriptor>& descs) {
  require(ids.size() == descs.size() && !descs.empty(), Errc::LengthMismatch,
          "ids and descriptors must pair up");
  std::ofstream out(path, std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write " + path);
  out.precision(17);
  for (std::size_t i = 0; i < descs.size(); ++i) {
    require(descs[i].values.size() == descs[0].values.size(), Errc::LayoutMismatch,
            "descriptor lengths differ");
    out << ids[i];
    for (double v : descs[i].values) out << "," << v;
    out << "\n";
  }
  std::ofstream hdr(path + ".layout.json", std::ios::trunc);
  require(bool(hdr), Errc::IoFailure, "cannot write layout header");
  hdr << descs[0].layout.to_json().dump(2) << "\n";
}

}  // namespace trixel
