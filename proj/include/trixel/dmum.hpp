#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "trixel/error.hpp"
#include "trixel/image.hpp"

namespace trixel {

/// Parameters of the distance-from-unthresholded-magnitudes map and of the
/// vertex extraction that feeds the triangulation.
struct DmumParams {
  double seed_scale = 16.0;  // cost assigned to zero-magnitude pixels, in 3-4 chamfer units
  int min_spacing = 6;       // suppression radius between kept vertices, pixels
  int border_step = 16;      // spacing of synthetic border vertices, pixels

  void validate_seed() const {
    require(seed_scale > 0.0, Errc::BadFormat, "seed_scale must be positive");
  }

  void validate_spacing(int width, int height) const {
    require(min_spacing >= 1 && border_step >= 2, Errc::BadFormat,
            "spacing parameters must be positive");
    require(min_spacing <= std::min(width, height) / 2, Errc::BadFormat,
            "min_spacing exceeds half the image size");
  }
};

/// Generalized distance transform to strong-gradient areas without any
/// threshold:
///
///   D(p) = min over q of [ chamfer(p, q) + C * (1 - M(q)) ]
///
/// with M the [0,1]-rescaled gradient magnitude. Strong edges act as
/// near-zero-cost sources; flat regions are their own sources at cost C.
/// Computed by seeding every pixel with C * (1 - M(p)) and running the
/// classical two-pass 3-4 chamfer propagation (Borgefors' weights).
inline ScalarField compute_dmum_from_magnitude(const ScalarField& mag,
                                               const DmumParams& params) {
  params.validate_seed();
  const int w = mag.width, h = mag.height;
  ScalarField d(w, h);
  for (std::size_t i = 0; i < d.values.size(); ++i)
    d.values[i] = params.seed_scale * (1.0 - mag.values[i]);

  const double kCard = 3.0, kDiag = 4.0;
  auto relax = [&](int x, int y, int nx, int ny, double step) {
    if (nx < 0 || nx >= w || ny < 0 || ny >= h) return;
    double cand = d.at(nx, ny) + step;
    if (cand < d.at(x, y)) d.at(x, y) = cand;
  };

  // forward pass: upper-left half of the 3x3 mask
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      relax(x, y, x - 1, y, kCard);
      relax(x, y, x, y - 1, kCard);
      relax(x, y, x - 1, y - 1, kDiag);
      relax(x, y, x + 1, y - 1, kDiag);
    }
  // backward pass: lower-right half
  for (int y = h - 1; y >= 0; --y)
    for (int x = w - 1; x >= 0; --x) {
      relax(x, y, x + 1, y, kCard);
      relax(x, y, x, y + 1, kCard);
      relax(x, y, x + 1, y + 1, kDiag);
      relax(x, y, x - 1, y + 1, kDiag);
    }
  return d;
}

inline ScalarField compute_dmum(const ScalarField& gray, const DmumParams& params) {
  return compute_dmum_from_magnitude(gradient_magnitude(gray), params);
}

/// Vertex sites for the triangulation: local minima of the DMUM surface,
/// thinned to the suppression radius, plus the image corners and evenly
/// spaced border points so the mesh always covers the full image.
///
/// Minima candidates are pixels not exceeding any 8-neighbor and strictly
/// below at least one; plateaus therefore contribute every rim-adjacent
/// pixel, and the thinning pass (sorted by value, then by (x, y)) keeps one
/// representative per suppression disc, the lexicographically smallest on
/// ties.
inline std::vector<Point> extract_vertices(const ScalarField& dmum, const DmumParams& params) {
  const int w = dmum.width, h = dmum.height;
  params.validate_spacing(w, h);

  struct Cand {
    double value;
    int x, y;
  };
  std::vector<Cand> cands;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = dmum.at(x, y);
      bool le_all = true, lt_any = false;
      for (int dy = -1; dy <= 1 && le_all; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          double nv = dmum.at(nx, ny);
          if (v > nv) { le_all = false; break; }
          if (v < nv) lt_any = true;
        }
      if (le_all && lt_any) cands.push_back({v, x, y});
    }

  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });

  // greedy suppression over a cell grid sized to the radius, so only the
  // 3x3 cell neighborhood needs checking
  const int r = params.min_spacing;
  const double r2 = double(r) * r;
  const int gw = (w + r - 1) / r, gh = (h + r - 1) / r;
  std::vector<std::vector<std::pair<int, int>>> grid(std::size_t(gw) * gh);
  std::vector<Cand> kept;
  for (const Cand& c : cands) {
    int cx = c.x / r, cy = c.y / r;
    bool ok = true;
    for (int gy = std::max(0, cy - 1); gy <= std::min(gh - 1, cy + 1) && ok; ++gy)
      for (int gx = std::max(0, cx - 1); gx <= std::min(gw - 1, cx + 1); ++gx) {
        for (const auto& [kx, ky] : grid[std::size_t(gy) * gw + gx]) {
          double dx = c.x - kx, dy = c.y - ky;
          if (dx * dx + dy * dy < r2) { ok = false; break; }
        }
        if (!ok) break;
      }
    if (ok) {
      kept.push_back(c);
      grid[std::size_t(cy) * gw + cx].push_back({c.x, c.y});
    }
  }

  std::set<std::pair<int, int>> sites;
  for (const Cand& k : kept) sites.insert({k.x, k.y});
  sites.insert({0, 0});
  sites.insert({w - 1, 0});
  sites.insert({0, h - 1});
  sites.insert({w - 1, h - 1});
  for (int x = params.border_step; x < w - 1; x += params.border_step) {
    sites.insert({x, 0});
    sites.insert({x, h - 1});
  }
  for (int y = params.border_step; y < h - 1; y += params.border_step) {
    sites.insert({0, y});
    sites.insert({w - 1, y});
  }

  std::vector<Point> out;
  out.reserve(sites.size());
  for (const auto& [x, y] : sites) out.push_back({double(x), double(y)});
  return out;
}

}  // namespace trixel
