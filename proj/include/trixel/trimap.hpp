#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trixel/error.hpp"
#include "trixel/image.hpp"
#include "trixel/image_io.hpp"
#include "trixel/mesh.hpp"

namespace trixel {

enum class TrimapLabel : std::uint8_t { Background = 0, Unknown = 1, Foreground = 2 };

enum class Stage { Skin, Clothes };

enum class MapTarget { Skin, Clothes };

/// Three-way seeding over segmentation units (pixels or trixels).
struct Trimap {
  std::vector<TrimapLabel> labels;

  std::size_t unit_count() const { return labels.size(); }

  std::size_t count(TrimapLabel l) const {
    std::size_t n = 0;
    for (TrimapLabel v : labels) n += (v == l);
    return n;
  }

  void validate() const {
    require(count(TrimapLabel::Foreground) > 0, Errc::EmptyForeground,
            "trimap has no foreground units");
    require(count(TrimapLabel::Background) > 0, Errc::EmptyBackground,
            "trimap has no background units");
  }
};

/// Face-anchored seed regions, all lengths in inter-eye-distance units.
/// Region outlines are generated as boundary points
///
///   pt(n) = midpoint + anchor + w(n) * v + w_n(n) * p_e
///
/// with v the eye-to-eye vector and p_e its 90-degree rotation, so every
/// region rotates and scales with the face.
struct GeometricTemplate {
  // foreground ellipse over the face
  double face_center_down = 0.4;
  double face_semi_axis = 0.8;
  double face_semi_down = 1.0;
  int face_points = 64;
  // foreground rectangle over the torso
  double torso_half_width = 1.5;
  double torso_top = 2.2;
  double torso_bottom = 4.5;
  // everything outside this band is certain background (clothes stage)
  double margin_half_width = 3.5;
  double margin_above = 1.5;
  double margin_below = 6.0;
  // the skin stage uses a tighter band: the torso area is certain non-skin,
  // otherwise the skin color model absorbs the clothes and starves the
  // second stage
  double skin_margin_half_width = 2.0;
  double skin_margin_above = 1.5;
  double skin_margin_below = 2.2;
};

/// Empirical P(foreground | canvas position) for one target class, living in
/// a canonical face-aligned frame.
struct ProbabilityMap {
  CanonicalFrame frame;
  ScalarField values;  // in [0, 1], dimensions = frame canvas
  MapTarget target = MapTarget::Skin;
};

/// Decision thresholds splitting a probability into the three trimap labels.
struct ProbTrimapParams {
  double eps_fg = 0.7;  // P >= eps_fg         -> Foreground
  double eps_bg = 0.1;  // P <  eps_bg         -> Background

  void validate() const {
    require(0.0 < eps_bg && eps_bg < eps_fg && eps_fg < 1.0, Errc::BadFormat,
            "need 0 < eps_bg < eps_fg < 1");
  }
};

namespace detail {

inline std::vector<Point> region_ring(const EyePair& eyes, double anchor_down,
                                      const std::vector<std::pair<double, double>>& weights) {
  Point mid = eyes.midpoint();
  Point v = eyes.axis();
  Point pe = eyes.down();
  std::vector<Point> ring;
  ring.reserve(weights.size());
  for (const auto& [w, wn] : weights) {
    double fx = mid.x + anchor_down * pe.x;
    double fy = mid.y + anchor_down * pe.y;
    ring.push_back({fx + w * v.x + wn * pe.x, fy + w * v.y + wn * pe.y});
  }
  return ring;
}

inline bool point_in_polygon(const std::vector<Point>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    bool crosses = (poly[i].y > y) != (poly[j].y > y);
    if (crosses) {
      double t = (y - poly[i].y) / (poly[j].y - poly[i].y);
      if (x < poly[i].x + t * (poly[j].x - poly[i].x)) inside = !inside;
    }
  }
  return inside;
}

inline std::vector<Point> face_ring(const EyePair& eyes, const GeometricTemplate& g) {
  std::vector<std::pair<double, double>> w;
  w.reserve(g.face_points);
  for (int n = 0; n < g.face_points; ++n) {
    double a = 2.0 * 3.14159265358979323846 * n / g.face_points;
    w.push_back({g.face_semi_axis * std::cos(a), g.face_semi_down * std::sin(a)});
  }
  return region_ring(eyes, g.face_center_down, w);
}

inline std::vector<Point> torso_ring(const EyePair& eyes, const GeometricTemplate& g) {
  std::vector<std::pair<double, double>> w = {{-g.torso_half_width, g.torso_top},
                                              {g.torso_half_width, g.torso_top},
                                              {g.torso_half_width, g.torso_bottom},
                                              {-g.torso_half_width, g.torso_bottom}};
  return region_ring(eyes, 0.0, w);
}

inline std::vector<Point> margin_ring(const EyePair& eyes, const GeometricTemplate& g,
                                      Stage stage) {
  double half = stage == Stage::Skin ? g.skin_margin_half_width : g.margin_half_width;
  double above = stage == Stage::Skin ? g.skin_margin_above : g.margin_above;
  double below = stage == Stage::Skin ? g.skin_margin_below : g.margin_below;
  std::vector<std::pair<double, double>> w = {
      {-half, -above}, {half, -above}, {half, below}, {-half, below}};
  return region_ring(eyes, 0.0, w);
}

/// Collapse per-pixel labels onto trixels by majority over pixel members;
/// ties (including empty slivers) stay Unknown and are left to the optimizer.
inline Trimap pixel_labels_to_trixels(const std::vector<TrimapLabel>& pixel_labels,
                                      const TrixelMesh& mesh) {
  Trimap out;
  out.labels.resize(mesh.trixels.size(), TrimapLabel::Unknown);
  for (const Trixel& t : mesh.trixels) {
    std::size_t counts[3] = {0, 0, 0};
    for (std::int32_t pi : t.pixel_members) counts[int(pixel_labels[pi])]++;
    std::size_t best = std::max({counts[0], counts[1], counts[2]});
    if (best == 0) continue;
    int winner = -1;
    for (int l = 0; l < 3; ++l) {
      if (counts[l] == best) {
        if (winner >= 0) { winner = -1; break; }  // tie
        winner = l;
      }
    }
    out.labels[t.id] = winner < 0 ? TrimapLabel::Unknown : TrimapLabel(winner);
  }
  return out;
}

}  // namespace detail

/// Seed regions from eye geometry alone. Skin stage: face ellipse is
/// foreground, outside the margin band is background. Clothes stage: torso
/// rectangle is foreground; the margin and the previously segmented skin are
/// background so sleeves and cleavage do not leak skin into the clothes
/// model.
inline Trimap geometric_trimap(int width, int height, const EyePair& eyes,
                               const GeometricTemplate& tmpl, Stage stage,
                               const Mask* prior_skin, const TrixelMesh* mesh) {
  require(eyes.distance() >= 1.0, Errc::DegenerateEyes, "inter-eye distance below 1 pixel");
  if (stage == Stage::Clothes)
    require(prior_skin != nullptr, Errc::EmptyMask, "clothes stage needs the skin mask");

  std::vector<Point> fg_ring = stage == Stage::Skin ? detail::face_ring(eyes, tmpl)
                                                    : detail::torso_ring(eyes, tmpl);
  std::vector<Point> margin = detail::margin_ring(eyes, tmpl, stage);

  std::vector<TrimapLabel> labels(std::size_t(width) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      std::size_t i = std::size_t(y) * width + x;
      bool in_margin = detail::point_in_polygon(margin, x, y);
      bool prior = stage == Stage::Clothes && prior_skin->at(x, y) != 0;
      if (!in_margin || prior) {
        labels[i] = TrimapLabel::Background;
      } else if (detail::point_in_polygon(fg_ring, x, y)) {
        labels[i] = TrimapLabel::Foreground;
      } else {
        labels[i] = TrimapLabel::Unknown;
      }
    }

  Trimap out = mesh ? detail::pixel_labels_to_trixels(labels, *mesh)
                    : Trimap{std::move(labels)};
  out.validate();
  return out;
}

/// Pool aligned ground-truth masks into an empirical foreground-probability
/// map (equal weight per image).
inline ProbabilityMap build_probability_map(
    const std::vector<std::pair<const Mask*, EyePair>>& masks, const CanonicalFrame& frame,
    MapTarget target) {
  require(!masks.empty(), Errc::NoMasks, "probability map needs at least one mask");
  ProbabilityMap map;
  map.frame = frame;
  map.target = target;
  map.values = ScalarField(frame.canvas_width, frame.canvas_height, 0.0);
  for (const auto& [mask, eyes] : masks) {
    Mask aligned = align_to_frame(*mask, eyes, frame);
    for (std::size_t i = 0; i < map.values.values.size(); ++i)
      map.values.values[i] += aligned.values[i] != 0 ? 1.0 : 0.0;
  }
  for (double& v : map.values.values) v /= double(masks.size());
  return map;
}

/// Warp the canonical-frame map into image coordinates and threshold it into
/// the three labels. Clothes stage forces previously segmented skin to
/// background.
inline Trimap probabilistic_trimap(int width, int height, const EyePair& eyes,
                                   const ProbabilityMap& map, const ProbTrimapParams& params,
                                   Stage stage, const Mask* prior_skin,
                                   const TrixelMesh* mesh) {
  params.validate();
  require(eyes.distance() >= 1.0, Errc::DegenerateEyes, "inter-eye distance below 1 pixel");
  if (stage == Stage::Clothes)
    require(prior_skin != nullptr, Errc::EmptyMask, "clothes stage needs the skin mask");

  Similarity to_frame = image_to_frame(eyes, map.frame);
  std::vector<TrimapLabel> labels(std::size_t(width) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      std::size_t i = std::size_t(y) * width + x;
      Point q = to_frame.apply({double(x), double(y)});
      double p = detail::bilinear(map.values, q.x, q.y);
      bool prior = stage == Stage::Clothes && prior_skin->at(x, y) != 0;
      if (prior || p < params.eps_bg) {
        labels[i] = TrimapLabel::Background;
      } else if (p >= params.eps_fg) {
        labels[i] = TrimapLabel::Foreground;
      } else {
        labels[i] = TrimapLabel::Unknown;
      }
    }

  Trimap out = mesh ? detail::pixel_labels_to_trixels(labels, *mesh)
                    : Trimap{std::move(labels)};
  out.validate();
  return out;
}

// ---- file formats ----------------------------------------------------------

/// 8-bit gray PNG: 0 = background, 128 = unknown, 255 = foreground.
inline void write_trimap(const std::string& path, const Trimap& tm, int width, int height) {
  require(tm.labels.size() == std::size_t(width) * height, Errc::DimMismatch,
          "trimap is not pixel-level");
  Mask img(width, height);
  for (std::size_t i = 0; i < tm.labels.size(); ++i)
    img.values[i] = tm.labels[i] == TrimapLabel::Foreground  ? 255
                    : tm.labels[i] == TrimapLabel::Unknown   ? 128
                                                             : 0;
  write_png(path, img);
}

inline Trimap read_trimap(const std::string& path, int* width = nullptr, int* height = nullptr) {
  auto file = detail::read_file(path);
  pngio::RawImage raw = pngio::decode(file, path);
  require(raw.channels == 1 && raw.bit_depth == 8, Errc::BadFormat,
          path + ": trimap must be 8-bit grayscale");
  Trimap tm;
  tm.labels.resize(raw.bytes.size());
  for (std::size_t i = 0; i < raw.bytes.size(); ++i) {
    switch (raw.bytes[i]) {
      case 0: tm.labels[i] = TrimapLabel::Background; break;
      case 128: tm.labels[i] = TrimapLabel::Unknown; break;
      case 255: tm.labels[i] = TrimapLabel::Foreground; break;
      default: fail(Errc::BadFormat, path + ": trimap values must be 0, 128 or 255");
    }
  }
  if (width) *width = int(raw.width);
  if (height) *height = int(raw.height);
  return tm;
}

/// 16-bit gray PNG (value / 65535 = probability) plus a JSON sidecar carrying
/// the canonical frame and the target class.
inline void write_probability_map(const std::string& png_path, const ProbabilityMap& map) {
  write_png_gray16(png_path, map.values);
  nlohmann::json j;
  j["frame"] = {{"canvas", {map.frame.canvas_width, map.frame.canvas_height}},
                {"eye_midpoint", {map.frame.eye_midpoint.x, map.frame.eye_midpoint.y}},
                {"d0", map.frame.inter_eye_distance}};
  j["target"] = map.target == MapTarget::Skin ? "skin" : "clothes";
  std::ofstream out(png_path + ".json", std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write " + png_path + ".json");
  out << j.dump(2) << "\n";
}

inline ProbabilityMap read_probability_map(const std::string& png_path) {
  ProbabilityMap map;
  map.values = read_png_gray16(png_path);
  std::ifstream in(png_path + ".json");
  require(bool(in), Errc::IoFailure, "cannot open " + png_path + ".json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::BadFormat, png_path + ".json: " + e.what());
  }
  map.frame.canvas_width = j["frame"]["canvas"][0].get<int>();
  map.frame.canvas_height = j["frame"]["canvas"][1].get<int>();
  map.frame.eye_midpoint = {j["frame"]["eye_midpoint"][0].get<double>(),
                            j["frame"]["eye_midpoint"][1].get<double>()};
  map.frame.inter_eye_distance = j["frame"]["d0"].get<double>();
  std::string target = j["target"].get<std::string>();
  require(target == "skin" || target == "clothes", Errc::BadFormat,
          png_path + ".json: target must be skin or clothes");
  map.target = target == "skin" ? MapTarget::Skin : MapTarget::Clothes;
  require(map.values.width == map.frame.canvas_width &&
              map.values.height == map.frame.canvas_height,
          Errc::DimMismatch, png_path + ": map dimensions do not match frame");
  return map;
}

}  // namespace trixel
