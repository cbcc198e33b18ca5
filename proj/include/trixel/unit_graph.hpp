#pragma once

#include <cmath>
#include <vector>

#include "trixel/error.hpp"
#include "trixel/gmm.hpp"
#include "trixel/image.hpp"
#include "trixel/mesh.hpp"

namespace trixel {

enum class UnitMode { Pixel, Trixel };

/// The segmentation graph over atomic units: one node per pixel with
/// 8-neighborhood edges, or one node per trixel with shared-edge adjacency.
struct UnitGraph {
  UnitMode mode = UnitMode::Pixel;
  int width = 0;
  int height = 0;
  std::vector<Color> colors;
  std::vector<Point> positions;
  std::vector<double> areas;                  // pixel counts; 1 for pixel units
  std::vector<std::pair<int, int>> edges;     // undirected, first < second
  std::vector<double> edge_dists;             // centroid distances per edge

  int unit_count() const { return int(colors.size()); }
};

inline UnitGraph build_unit_graph(const RgbImage& img, UnitMode mode,
                                  const TrixelMesh* mesh = nullptr) {
  UnitGraph g;
  g.mode = mode;
  g.width = img.width;
  g.height = img.height;

  if (mode == UnitMode::Pixel) {
    const int w = img.width, h = img.height;
    g.colors.resize(std::size_t(w) * h);
    g.positions.resize(g.colors.size());
    g.areas.assign(g.colors.size(), 1.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::size_t i = std::size_t(y) * w + x;
        const double* p = img.px(x, y);
        g.colors[i] = {p[0], p[1], p[2]};
        g.positions[i] = {double(x), double(y)};
      }
    const double sqrt2 = std::sqrt(2.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        int i = y * w + x;
        if (x + 1 < w) {
          g.edges.push_back({i, i + 1});
          g.edge_dists.push_back(1.0);
        }
        if (y + 1 < h) {
          g.edges.push_back({i, i + w});
          g.edge_dists.push_back(1.0);
          if (x + 1 < w) {
            g.edges.push_back({i, i + w + 1});
            g.edge_dists.push_back(sqrt2);
          }
          if (x > 0) {
            g.edges.push_back({i - 1 + w, i});  // keep first < second
            g.edge_dists.push_back(sqrt2);
          }
        }
      }
    for (auto& [a, b] : g.edges)
      if (a > b) std::swap(a, b);
    return g;
  }

  require(mesh != nullptr && mesh->rasterized, Errc::MeshMismatch,
          "trixel mode needs a rasterized mesh");
  require(mesh->width == img.width && mesh->height == img.height, Errc::MeshMismatch,
          "mesh dimensions do not match image");
  g.colors.resize(mesh->trixels.size());
  g.positions.resize(mesh->trixels.size());
  g.areas.resize(mesh->trixels.size());
  for (const Trixel& t : mesh->trixels) {
    g.colors[t.id] = t.mean_color;
    g.positions[t.id] = t.centroid;
    g.areas[t.id] = double(t.pixel_members.size());
    for (int n : t.neighbors)
      if (t.id < n) {
        g.edges.push_back({t.id, n});
        double d = dist(t.centroid, mesh->trixels[n].centroid);
        g.edge_dists.push_back(std::max(d, 1e-6));
      }
  }
  return g;
}

/// Contrast normalization: beta = 1 / (2 * mean color difference over
/// adjacent pairs), with the squared difference by default (the classical
/// choice; `squared_distance = false` switches to the plain Euclidean
/// reading). A uniform graph gets beta = 0, which turns the exponential term
/// of every neighbor link into 1.
inline double compute_beta(const UnitGraph& g, bool squared_distance = true) {
  require(!g.edges.empty(), Errc::NoEdges, "graph has no edges");
  double sum = 0.0;
  for (const auto& [a, b] : g.edges) {
    double d2 = color_dist2(g.colors[a], g.colors[b]);
    sum += squared_distance ? d2 : std::sqrt(d2);
  }
  double mean = sum / double(g.edges.size());
  return mean > 0.0 ? 1.0 / (2.0 * mean) : 0.0;
}

/// Boundary penalty between adjacent units: high for similar colors, low
/// across strong color edges, attenuated by centroid distance.
inline double n_link(const UnitGraph& g, int i, int j, double beta, double dist_ij,
                     double gamma = 50.0) {
  return gamma / dist_ij * std::exp(-beta * color_dist2(g.colors[i], g.colors[j]));
}

inline std::vector<double> all_n_links(const UnitGraph& g, double beta, double gamma = 50.0) {
  std::vector<double> out(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    out[e] = n_link(g, g.edges[e].first, g.edges[e].second, beta, g.edge_dists[e], gamma);
  return out;
}

}  // namespace trixel
