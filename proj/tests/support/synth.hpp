#pragma once

// Deterministic synthetic fixtures: person scenes compatible with the
// geometric trimap template (head ellipse, torso trapezoid, textured
// background) with exact ground-truth masks, plus natural-photo stand-ins
// for mesh statistics.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "trixel/image.hpp"
#include "trixel/rng.hpp"

namespace synth {

struct PersonScene {
  std::string id;
  trixel::RgbImage image;
  trixel::EyePair eyes;
  trixel::Mask skin_gt;
  trixel::Mask clothes_gt;
  trixel::Mask people_gt;
};

struct SceneSpec {
  int width = 128;
  int height = 160;
  double eye_distance = 19.0;
  double mid_x = 64.0;
  double mid_y = 42.0;
  double tilt_deg = 0.0;  // eye-axis rotation
  std::array<double, 3> skin{205.0, 168.0, 140.0};
  std::array<double, 3> clothes{60.0, 90.0, 170.0};
  double noise = 9.0;
};

// person geometry in inter-eye units; jittered per scene but always keeping
// the geometric-template seed regions inside the true regions
struct PersonGeometry {
  double head_down = 0.45, head_ra = 1.25, head_rb = 1.45;
  double neck_half = 0.4, neck_top = 1.6, neck_bottom = 2.1;
  double torso_half_top = 2.2, torso_half_bottom = 2.6;
  double torso_top = 1.9, torso_bottom = 5.3;
};

inline PersonScene make_person_scene(int index, std::uint64_t seed) {
  trixel::Rng rng(seed * 1000003ULL + std::uint64_t(index) * 7919ULL + 1);

  SceneSpec s;
  s.eye_distance = 17.0 + rng.uniform(0.0, 4.0);
  s.mid_x = 60.0 + rng.uniform(0.0, 8.0);
  s.mid_y = 38.0 + rng.uniform(0.0, 6.0);
  s.tilt_deg = rng.uniform(-9.0, 9.0);
  // person colors sit a few noise sigmas away from the background gray axis,
  // so the pixel noise populates the color shell near the class boundary
  double base_luma = 122.0 + rng.uniform(0.0, 16.0);
  s.skin = {base_luma + 38.0 + rng.uniform(-4, 4), base_luma + 14.0 + rng.uniform(-4, 4),
            base_luma - 18.0 + rng.uniform(-4, 4)};
  const std::array<std::array<double, 3>, 5> hueshift = {{{-28, -6, 34},
                                                          {36, -18, -14},
                                                          {-24, 26, -18},
                                                          {22, -22, 26},
                                                          {-30, 14, 22}}};
  const auto& hs = hueshift[index % hueshift.size()];
  s.clothes = {base_luma + hs[0] + rng.uniform(-5, 5), base_luma + hs[1] + rng.uniform(-5, 5),
               base_luma + hs[2] + rng.uniform(-5, 5)};
  s.noise = 10.0 + rng.uniform(0.0, 3.0);

  // per-scene body-shape variation widens the pooled probability map's
  // uncertain band, so the probabilistic trimaps leave real work to the cut
  PersonGeometry geo;
  geo.head_ra = 1.1 + rng.uniform(0.0, 0.4);
  geo.head_rb = 1.3 + rng.uniform(0.0, 0.25);
  geo.head_down = 0.40 + rng.uniform(0.0, 0.1);
  geo.torso_half_top = 1.8 + rng.uniform(0.0, 0.5);
  geo.torso_half_bottom = geo.torso_half_top + rng.uniform(0.1, 0.45);
  geo.torso_top = 1.8 + rng.uniform(0.0, 0.25);
  geo.torso_bottom = 4.6 + rng.uniform(0.0, 0.8);

  PersonScene scene;
  scene.id = "person_" + std::to_string(index);
  scene.image = trixel::RgbImage(s.width, s.height);
  scene.skin_gt = trixel::Mask(s.width, s.height);
  scene.clothes_gt = trixel::Mask(s.width, s.height);
  scene.people_gt = trixel::Mask(s.width, s.height);

  double rad = s.tilt_deg * 3.14159265358979323846 / 180.0;
  trixel::Point v{std::cos(rad), std::sin(rad)};       // unit eye axis
  trixel::Point pe{-v.y, v.x};                          // unit down axis
  double d = s.eye_distance;
  scene.eyes.left = {s.mid_x - 0.5 * d * v.x, s.mid_y - 0.5 * d * v.y};
  scene.eyes.right = {s.mid_x + 0.5 * d * v.x, s.mid_y + 0.5 * d * v.y};

  auto face_coords = [&](double px, double py) {
    double dx = px - s.mid_x, dy = py - s.mid_y;
    return trixel::Point{(dx * v.x + dy * v.y) / d, (dx * pe.x + dy * pe.y) / d};
  };

  // background: smooth multi-octave texture forming a color continuum (the
  // k-means quantization of a continuum keeps shifting between iterations,
  // so the pixel engine churns like on natural photos while trixel means
  // stay locally averaged), shaded toward clothes-like tones near the floor
  // and skin-like tones on one side
  auto make_octave = [&](int cellpx) {
    int gw = s.width / cellpx + 2, gh = s.height / cellpx + 2;
    std::vector<double> grid(std::size_t(gw) * gh);
    for (double& v : grid) v = rng.next_double();
    return std::pair<std::vector<double>, int>(std::move(grid), gw);
  };
  auto [oct0, gw0] = make_octave(48);
  auto [oct1, gw1] = make_octave(16);
  auto bg_sample = [&](const std::vector<double>& grid, int gw, int cellpx, int x, int y) {
    double u = double(x) / cellpx, vq = double(y) / cellpx;
    int x0 = int(u), y0 = int(vq);
    double fx = u - x0, fy = vq - y0;
    auto at = [&](int gx, int gy) { return grid[std::size_t(gy) * gw + gx]; };
    return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) +
           (1 - fx) * fy * at(x0, y0 + 1) + fx * fy * at(x0 + 1, y0 + 1);
  };
  std::array<double, 3> bg_base = {base_luma + rng.uniform(-4, 4),
                                   base_luma + rng.uniform(-4, 4),
                                   base_luma + rng.uniform(-4, 4)};
  // the unknown band darkens smoothly toward the person (a shadow ramp, as
  // around people in real photos); the hard background holds only the ramp's
  // outer end, so the background model must absorb it stepwise and the class
  // boundary keeps moving for several rounds
  std::array<double, 3> band_tint = {-30.0 + rng.uniform(-4, 4), -21.0 + rng.uniform(-4, 4),
                                     -10.0 + rng.uniform(-4, 4)};

  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      auto [a, b] = face_coords(x, y);

      bool head = false, neck = false, torso = false;
      {
        double ea = (a - 0.0) / geo.head_ra;
        double eb = (b - geo.head_down) / geo.head_rb;
        head = ea * ea + eb * eb <= 1.0;
      }
      neck = std::abs(a) <= geo.neck_half && b >= geo.neck_top && b <= geo.neck_bottom;
      if (b >= geo.torso_top && b <= geo.torso_bottom) {
        double t = (b - geo.torso_top) / (geo.torso_bottom - geo.torso_top);
        double half = geo.torso_half_top + t * (geo.torso_half_bottom - geo.torso_half_top);
        torso = std::abs(a) <= half;
      }

      std::array<double, 3> color;
      if (torso) {
        color = s.clothes;
        // darker fold stripes make the clothes distribution bimodal
        if (int(std::floor((a * 3.0 + b * 2.0) * 2.0)) % 5 == 0)
          for (auto& c : color) c *= 0.82;
        scene.clothes_gt.at(x, y) = 255;
      } else if (head || neck) {
        color = s.skin;
        // gentle shading across the face
        for (auto& c : color) c -= 14.0 * (a + 1.3) / 2.6;
        scene.skin_gt.at(x, y) = 255;
      } else {
        double tex = 0.65 * bg_sample(oct0, gw0, 48, x, y) + 0.35 * bg_sample(oct1, gw1, 16, x, y);
        double swing = 44.0 * (tex - 0.5);
        // tint ramps up from the margin boundary toward the person
        double u = std::max(std::abs(a) / 3.5, b > 0.0 ? b / 6.0 : -b / 1.5);
        double w = std::clamp((1.0 - u) * 1.6, 0.0, 1.0);
        for (int c = 0; c < 3; ++c) color[c] = bg_base[c] + swing + w * band_tint[c];
      }
      // heavy-tailed pixel noise (real photographs are kurtotic, not
      // Gaussian): a speckle fraction draws from a much wider component
      double sigma = rng.next_double() < 0.13 ? 3.2 * s.noise : s.noise;
      double n0 = rng.normal() * sigma;
      double n1 = rng.normal() * sigma;
      double n2 = rng.normal() * sigma;
      scene.image.set(x, y, std::clamp(color[0] + n0, 0.0, 255.0),
                      std::clamp(color[1] + n1, 0.0, 255.0),
                      std::clamp(color[2] + n2, 0.0, 255.0));
      if (scene.skin_gt.at(x, y) || scene.clothes_gt.at(x, y))
        scene.people_gt.at(x, y) = 255;
    }
  return scene;
}

inline std::vector<PersonScene> make_desk_corpus(int n, std::uint64_t seed) {
  std::vector<PersonScene> corpus;
  corpus.reserve(n);
  for (int i = 0; i < n; ++i) corpus.push_back(make_person_scene(i, seed));
  return corpus;
}

// multi-octave value noise plus soft blobs: a stand-in for natural photos
// with smooth regions and real contours
inline trixel::RgbImage make_natural_photo(int index, std::uint64_t seed, int w = 224,
                                           int h = 224) {
  trixel::Rng rng(seed * 7789ULL + std::uint64_t(index) * 104729ULL + 5);

  auto octave = [&](int cellpx) {
    int gw = w / cellpx + 2, gh = h / cellpx + 2;
    std::vector<double> grid(std::size_t(gw) * gh);
    for (double& v : grid) v = rng.next_double();
    return std::tuple<std::vector<double>, int, int>(std::move(grid), gw, cellpx);
  };
  auto [g0, gw0, c0] = octave(64);
  auto [g1, gw1, c1] = octave(24);
  auto [g2, gw2, c2] = octave(9);

  auto sample = [&](const std::vector<double>& grid, int gw, int cellpx, double x, double y) {
    double u = x / cellpx, vq = y / cellpx;
    int x0 = int(u), y0 = int(vq);
    double fx = u - x0, fy = vq - y0;
    auto at = [&](int gx, int gy) { return grid[std::size_t(gy) * gw + gx]; };
    return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) +
           (1 - fx) * fy * at(x0, y0 + 1) + fx * fy * at(x0 + 1, y0 + 1);
  };

  struct Blob {
    double cx, cy, r;
    std::array<double, 3> color;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 6; ++i)
    blobs.push_back({rng.uniform(0.15, 0.85) * w, rng.uniform(0.15, 0.85) * h,
                     rng.uniform(0.06, 0.2) * w,
                     {rng.uniform(40, 215), rng.uniform(40, 215), rng.uniform(40, 215)}});

  trixel::RgbImage img(w, h);
  std::array<double, 3> tint = {rng.uniform(0.7, 1.2), rng.uniform(0.7, 1.2),
                                rng.uniform(0.7, 1.2)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double base = 0.55 * sample(g0, gw0, c0, x, y) + 0.3 * sample(g1, gw1, c1, x, y) +
                    0.15 * sample(g2, gw2, c2, x, y);
      std::array<double, 3> color = {base * 235.0 * tint[0], base * 235.0 * tint[1],
                                     base * 235.0 * tint[2]};
      for (const Blob& bl : blobs) {
        double dx = x - bl.cx, dy = y - bl.cy;
        double d2 = dx * dx + dy * dy;
        if (d2 < bl.r * bl.r) {
          double t = 1.0 - std::sqrt(d2) / bl.r;
          t = std::min(1.0, t * 2.5);
          for (int c = 0; c < 3; ++c) color[c] = (1 - t) * color[c] + t * bl.color[c];
        }
      }
      double n = rng.normal() * 2.5;
      img.set(x, y, std::clamp(color[0] + n, 0.0, 255.0), std::clamp(color[1] + n, 0.0, 255.0),
              std::clamp(color[2] + n, 0.0, 255.0));
    }
  return img;
}

}  // namespace synth
