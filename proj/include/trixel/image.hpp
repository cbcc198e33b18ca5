#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "trixel/error.hpp"

namespace trixel {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Interleaved RGB image, channels stored as reals in [0, 255].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major, 3 channels per pixel

  RgbImage() = default;
  RgbImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(std::size_t(w) * h * 3, fill) {}

  std::size_t idx(int x, int y) const { return (std::size_t(y) * width + x) * 3; }
  double* px(int x, int y) { return data.data() + idx(x, y); }
  const double* px(int x, int y) const { return data.data() + idx(x, y); }

  void set(int x, int y, double r, double g, double b) {
    double* p = px(x, y);
    p[0] = r; p[1] = g; p[2] = b;
  }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::size_t pixel_count() const { return std::size_t(width) * height; }
};

/// Single-channel field of reals (grayscale, gradients, distance maps).
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  ScalarField() = default;
  ScalarField(int w, int h, double fill = 0.0)
      : width(w), height(h), values(std::size_t(w) * h, fill) {}

  double& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

/// Per-pixel binary mask; 0 = background, 255 = foreground.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), values(std::size_t(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  std::size_t area() const {
    std::size_t n = 0;
    for (auto v : values) n += (v != 0);
    return n;
  }
};

/// Sub-pixel eye locations; the segment between them anchors all face-relative
/// geometry.
struct EyePair {
  Point left;
  Point right;

  Point midpoint() const { return {(left.x + right.x) * 0.5, (left.y + right.y) * 0.5}; }
  double distance() const { return dist(left, right); }
  // eye-to-eye vector (left -> right)
  Point axis() const { return {right.x - left.x, right.y - left.y}; }
  // 90-degree rotation of the axis; points "down" the face for horizontal eyes
  // in image coordinates (y grows downward)
  Point down() const {
    Point v = axis();
    return {-v.y, v.x};
  }
};

/// Target frame for face-aligned resampling: eye midpoint lands on a fixed
/// canvas location with a fixed inter-eye distance.
struct CanonicalFrame {
  int canvas_width = 256;
  int canvas_height = 256;
  Point eye_midpoint{128.0, 80.0};
  double inter_eye_distance = 40.0;
};

inline ScalarField to_grayscale(const RgbImage& img) {
  ScalarField out(img.width, img.height);
  const double* p = img.data.data();
  for (std::size_t i = 0; i < out.values.size(); ++i, p += 3)
    out.values[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  return out;
}

namespace detail {
inline double clamped(const ScalarField& f, int x, int y) {
  x = std::clamp(x, 0, f.width - 1);
  y = std::clamp(y, 0, f.height - 1);
  return f.at(x, y);
}
}  // namespace detail

/// 3x3 Sobel magnitude with replicated-edge padding, rescaled to [0, 1].
/// A constant input stays identically zero.
inline ScalarField gradient_magnitude(const ScalarField& gray) {
  require(gray.width >= 3 && gray.height >= 3, Errc::ImageTooSmall,
          "gradient_magnitude needs at least 3x3");
  ScalarField out(gray.width, gray.height);
  double maxv = 0.0;
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      auto v = [&](int dx, int dy) { return detail::clamped(gray, x + dx, y + dy); };
      double gx = (v(1, -1) + 2.0 * v(1, 0) + v(1, 1)) -
                  (v(-1, -1) + 2.0 * v(-1, 0) + v(-1, 1));
      double gy = (v(-1, 1) + 2.0 * v(0, 1) + v(1, 1)) -
                  (v(-1, -1) + 2.0 * v(0, -1) + v(1, -1));
      double m = std::sqrt(gx * gx + gy * gy);
      out.at(x, y) = m;
      maxv = std::max(maxv, m);
    }
  }
  if (maxv > 0.0)
    for (double& v : out.values) v /= maxv;
  return out;
}

/// Similarity transform (rotate + scale + translate) between image coordinates
/// and a canonical face frame.
struct Similarity {
  // p' = R * s * p + t, with R the rotation taking the eye axis to +x
  double sr_xx, sr_xy, sr_yx, sr_yy;  // combined scale-rotation
  double tx, ty;

  Point apply(const Point& p) const {
    return {sr_xx * p.x + sr_xy * p.y + tx, sr_yx * p.x + sr_yy * p.y + ty};
  }

  Similarity inverse() const {
    double det = sr_xx * sr_yy - sr_xy * sr_yx;
    double ixx = sr_yy / det, ixy = -sr_xy / det;
    double iyx = -sr_yx / det, iyy = sr_xx / det;
    return {ixx, ixy, iyx, iyy, -(ixx * tx + ixy * ty), -(iyx * tx + iyy * ty)};
  }
};

/// Map from image coordinates into the canonical frame defined by `frame`.
inline Similarity image_to_frame(const EyePair& eyes, const CanonicalFrame& frame) {
  double d = eyes.distance();
  require(d >= 1.0, Errc::DegenerateEyes, "inter-eye distance below 1 pixel");
  Point u{eyes.axis().x / d, eyes.axis().y / d};
  double s = frame.inter_eye_distance / d;
  // rotation taking u to (1, 0), then uniform scale s
  double sr_xx = s * u.x, sr_xy = s * u.y;
  double sr_yx = -s * u.y, sr_yy = s * u.x;
  Point m = eyes.midpoint();
  double tx = frame.eye_midpoint.x - (sr_xx * m.x + sr_xy * m.y);
  double ty = frame.eye_midpoint.y - (sr_yx * m.x + sr_yy * m.y);
  return {sr_xx, sr_xy, sr_yx, sr_yy, tx, ty};
}

namespace detail {

inline double bilinear(const ScalarField& f, double x, double y) {
  if (x < 0.0 || y < 0.0 || x > f.width - 1.0 || y > f.height - 1.0) return 0.0;
  int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  int x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
  double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * f.at(x0, y0) + fx * (1 - fy) * f.at(x1, y0) +
         (1 - fx) * fy * f.at(x0, y1) + fx * fy * f.at(x1, y1);
}

inline void bilinear_rgb(const RgbImage& img, double x, double y, double out[3]) {
  if (x < 0.0 || y < 0.0 || x > img.width - 1.0 || y > img.height - 1.0) {
    out[0] = out[1] = out[2] = 0.0;
    return;
  }
  int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
  double fx = x - x0, fy = y - y0;
  const double* p00 = img.px(x0, y0);
  const double* p10 = img.px(x1, y0);
  const double* p01 = img.px(x0, y1);
  const double* p11 = img.px(x1, y1);
  for (int c = 0; c < 3; ++c)
    out[c] = (1 - fx) * (1 - fy) * p00[c] + fx * (1 - fy) * p10[c] +
             (1 - fx) * fy * p01[c] + fx * fy * p11[c];
}

}  // namespace detail

/// Resample an image into the canonical frame (bilinear, out-of-source = 0).
inline RgbImage align_to_frame(const RgbImage& img, const EyePair& eyes,
                               const CanonicalFrame& frame) {
  Similarity inv = image_to_frame(eyes, frame).inverse();
  RgbImage out(frame.canvas_width, frame.canvas_height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      Point src = inv.apply({double(x), double(y)});
      detail::bilinear_rgb(img, src.x, src.y, out.px(x, y));
    }
  return out;
}

inline ScalarField align_to_frame(const ScalarField& f, const EyePair& eyes,
                                  const CanonicalFrame& frame) {
  Similarity inv = image_to_frame(eyes, frame).inverse();
  ScalarField out(frame.canvas_width, frame.canvas_height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      Point src = inv.apply({double(x), double(y)});
      out.at(x, y) = detail::bilinear(f, src.x, src.y);
    }
  return out;
}

/// Mask variant: nearest-neighbor sampling, out-of-source = 0.
inline Mask align_to_frame(const Mask& m, const EyePair& eyes, const CanonicalFrame& frame) {
  Similarity inv = image_to_frame(eyes, frame).inverse();
  Mask out(frame.canvas_width, frame.canvas_height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      Point src = inv.apply({double(x), double(y)});
      int sx = int(std::lround(src.x)), sy = int(std::lround(src.y));
      out.at(x, y) = m.in_bounds(sx, sy) ? m.at(sx, sy) : 0;
    }
  return out;
}

}  // namespace trixel
