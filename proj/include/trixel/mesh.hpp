#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "trixel/delaunay.hpp"
#include "trixel/dmum.hpp"
#include "trixel/error.hpp"
#include "trixel/image.hpp"

namespace trixel {

/// A triangular superpixel: one Delaunay triangle plus the pixels whose
/// centers fall inside it.
struct Trixel {
  int id = -1;
  std::array<int, 3> vertices{-1, -1, -1};
  std::vector<std::int32_t> pixel_members;  // flattened y * width + x
  std::array<double, 3> mean_color{0.0, 0.0, 0.0};
  Point centroid{};                      // average of the three vertex coordinates
  std::vector<int> neighbors;            // shared-edge adjacency, at most 3
};

/// Triangular mesh partitioning an image; every pixel belongs to exactly one
/// trixel once rasterized.
struct TrixelMesh {
  int width = 0;
  int height = 0;
  std::vector<Point> vertex_coords;
  std::vector<Trixel> trixels;

  bool rasterized = false;

  std::size_t pixel_count() const { return std::size_t(width) * height; }
};

inline double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * std::abs(delaunay::orient2d(a, b, c));
}

/// Delaunay triangulation of the given sites (exact duplicates dropped,
/// insertion order kept for cocircular ties). Geometry only: pixel membership
/// and colors are filled in by rasterize_and_summarize.
inline TrixelMesh triangulate(const std::vector<Point>& vertices, int width, int height) {
  std::vector<Point> unique_pts;
  unique_pts.reserve(vertices.size());
  for (const Point& p : vertices) {
    bool dup = false;
    for (const Point& q : unique_pts)
      if (q.x == p.x && q.y == p.y) { dup = true; break; }
    if (!dup) unique_pts.push_back(p);
  }
  require(unique_pts.size() >= 3, Errc::TooFewVertices,
          "triangulation needs at least 3 distinct vertices");

  delaunay::Triangulator tr(unique_pts);
  auto tris = tr.triangles();
  require(!tris.empty(), Errc::TooFewVertices, "vertices are collinear");

  TrixelMesh mesh;
  mesh.width = width;
  mesh.height = height;
  mesh.vertex_coords = std::move(unique_pts);
  mesh.trixels.resize(tris.size());

  std::map<std::pair<int, int>, std::vector<int>> edge_owners;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    Trixel& t = mesh.trixels[i];
    t.id = int(i);
    t.vertices = {tris[i][0], tris[i][1], tris[i][2]};
    const Point& a = mesh.vertex_coords[t.vertices[0]];
    const Point& b = mesh.vertex_coords[t.vertices[1]];
    const Point& c = mesh.vertex_coords[t.vertices[2]];
    t.centroid = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    for (int e = 0; e < 3; ++e) {
      int u = t.vertices[e], v = t.vertices[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      edge_owners[{u, v}].push_back(t.id);
    }
  }
  for (const auto& [edge, owners] : edge_owners) {
    if (owners.size() == 2) {
      mesh.trixels[owners[0]].neighbors.push_back(owners[1]);
      mesh.trixels[owners[1]].neighbors.push_back(owners[0]);
    }
  }
  for (Trixel& t : mesh.trixels) std::sort(t.neighbors.begin(), t.neighbors.end());
  return mesh;
}

namespace detail {

inline bool point_in_triangle_inclusive(const Point& a, const Point& b, const Point& c,
                                        const Point& p) {
  // triangles are stored with orient2d(a,b,c) >= 0
  const double tol = 1e-9;
  return delaunay::orient2d(a, b, p) >= -tol && delaunay::orient2d(b, c, p) >= -tol &&
         delaunay::orient2d(c, a, p) >= -tol;
}

}  // namespace detail

/// Assign every pixel center to one trixel and accumulate per-trixel color
/// statistics. A center exactly on a shared edge goes to the smaller trixel
/// id; the rare center missed by numeric edge cases goes to the trixel with
/// the nearest centroid. Sliver trixels that own no pixels take a bilinear
/// color sample at their centroid so downstream color terms stay defined.
inline void rasterize_and_summarize(TrixelMesh& mesh, const RgbImage& img) {
  require(mesh.width == img.width && mesh.height == img.height, Errc::MeshMismatch,
          "mesh dimensions do not match image");
  const int w = img.width, h = img.height;
  std::vector<std::int32_t> owner(std::size_t(w) * h, -1);

  for (Trixel& t : mesh.trixels) {
    t.pixel_members.clear();
    Point a = mesh.vertex_coords[t.vertices[0]];
    Point b = mesh.vertex_coords[t.vertices[1]];
    Point c = mesh.vertex_coords[t.vertices[2]];
    if (delaunay::orient2d(a, b, c) < 0.0) std::swap(b, c);
    int x0 = std::max(0, int(std::floor(std::min({a.x, b.x, c.x}))));
    int x1 = std::min(w - 1, int(std::ceil(std::max({a.x, b.x, c.x}))));
    int y0 = std::max(0, int(std::floor(std::min({a.y, b.y, c.y}))));
    int y1 = std::min(h - 1, int(std::ceil(std::max({a.y, b.y, c.y}))));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        std::size_t i = std::size_t(y) * w + x;
        if (owner[i] != -1) continue;  // earlier (smaller) id wins shared edges
        if (detail::point_in_triangle_inclusive(a, b, c, {double(x), double(y)}))
          owner[i] = t.id;
      }
  }

  // numeric stragglers: nearest centroid
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::size_t i = std::size_t(y) * w + x;
      if (owner[i] != -1) continue;
      double best = std::numeric_limits<double>::max();
      int best_id = 0;
      for (const Trixel& t : mesh.trixels) {
        double dx = t.centroid.x - x, dy = t.centroid.y - y;
        double d2 = dx * dx + dy * dy;
        if (d2 < best) { best = d2; best_id = t.id; }
      }
      owner[i] = best_id;
    }

  for (std::size_t i = 0; i < owner.size(); ++i)
    mesh.trixels[owner[i]].pixel_members.push_back(std::int32_t(i));

  for (Trixel& t : mesh.trixels) {
    if (t.pixel_members.empty()) {
      double cx = std::clamp(t.centroid.x, 0.0, double(w - 1));
      double cy = std::clamp(t.centroid.y, 0.0, double(h - 1));
      detail::bilinear_rgb(img, cx, cy, t.mean_color.data());
      continue;
    }
    double sum[3] = {0.0, 0.0, 0.0};
    for (std::int32_t pi : t.pixel_members) {
      const double* p = img.data.data() + std::size_t(pi) * 3;
      sum[0] += p[0];
      sum[1] += p[1];
      sum[2] += p[2];
    }
    double n = double(t.pixel_members.size());
    t.mean_color = {sum[0] / n, sum[1] / n, sum[2] / n};
  }
  mesh.rasterized = true;
}

/// Area-weighted mean of the within-trixel color variance (averaged over the
/// three channels). This is the natural measurement uncertainty of a trixel
/// mean color when trixels act as segmentation units.
inline double mean_member_variance(const TrixelMesh& mesh, const RgbImage& img) {
  double var_sum = 0.0;
  double weight = 0.0;
  for (const Trixel& t : mesh.trixels) {
    if (t.pixel_members.size() < 2) continue;
    double n = double(t.pixel_members.size());
    double acc = 0.0;
    for (std::int32_t pi : t.pixel_members) {
      const double* p = img.data.data() + std::size_t(pi) * 3;
      for (int c = 0; c < 3; ++c) {
        double d = p[c] - t.mean_color[c];
        acc += d * d;
      }
    }
    var_sum += acc / 3.0;
    weight += n;
  }
  return weight > 0.0 ? var_sum / weight : 0.0;
}

/// Full pipeline: grayscale -> DMUM -> vertex sites -> Delaunay -> pixel
/// membership and color statistics.
inline TrixelMesh build_mesh(const RgbImage& img, const DmumParams& params = {}) {
  ScalarField gray = to_grayscale(img);
  ScalarField d = compute_dmum(gray, params);
  std::vector<Point> sites = extract_vertices(d, params);
  TrixelMesh mesh = triangulate(sites, img.width, img.height);
  rasterize_and_summarize(mesh, img);
  return mesh;
}

/// Text dump, one vertex / triangle per line. Adjacency and pixel statistics
/// are recomputed on load.
inline void write_mesh(const std::string& path, const TrixelMesh& mesh) {
  std::ofstream out(path, std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write " + path);
  out << "TRITOM " << mesh.width << " " << mesh.height << " " << mesh.vertex_coords.size()
      << " " << mesh.trixels.size() << "\n";
  out.precision(17);
  for (const Point& p : mesh.vertex_coords) out << "v " << p.x << " " << p.y << "\n";
  for (const Trixel& t : mesh.trixels)
    out << "t " << t.vertices[0] << " " << t.vertices[1] << " " << t.vertices[2] << "\n";
  require(bool(out), Errc::IoFailure, "short write to " + path);
}

inline TrixelMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), Errc::IoFailure, "cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  std::size_t nv = 0, nt = 0;
  in >> magic >> w >> h >> nv >> nt;
  require(bool(in) && magic == "TRITOM" && w > 0 && h > 0, Errc::BadFormat,
          path + ": bad mesh header");

  TrixelMesh mesh;
  mesh.width = w;
  mesh.height = h;
  mesh.vertex_coords.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::string tag;
    in >> tag >> mesh.vertex_coords[i].x >> mesh.vertex_coords[i].y;
    require(bool(in) && tag == "v", Errc::BadFormat, path + ": bad vertex line");
  }
  mesh.trixels.resize(nt);
  std::map<std::pair<int, int>, std::vector<int>> edge_owners;
  for (std::size_t i = 0; i < nt; ++i) {
    std::string tag;
    Trixel& t = mesh.trixels[i];
    in >> tag >> t.vertices[0] >> t.vertices[1] >> t.vertices[2];
    require(bool(in) && tag == "t", Errc::BadFormat, path + ": bad triangle line");
    for (int v : t.vertices)
      require(v >= 0 && std::size_t(v) < nv, Errc::BadFormat, path + ": vertex index range");
    t.id = int(i);
    const Point& a = mesh.vertex_coords[t.vertices[0]];
    const Point& b = mesh.vertex_coords[t.vertices[1]];
    const Point& c = mesh.vertex_coords[t.vertices[2]];
    t.centroid = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    for (int e = 0; e < 3; ++e) {
      int u = t.vertices[e], v = t.vertices[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      edge_owners[{u, v}].push_back(t.id);
    }
  }
  for (const auto& [edge, owners] : edge_owners)
    if (owners.size() == 2) {
      mesh.trixels[owners[0]].neighbors.push_back(owners[1]);
      mesh.trixels[owners[1]].neighbors.push_back(owners[0]);
    }
  for (Trixel& t : mesh.trixels) std::sort(t.neighbors.begin(), t.neighbors.end());
  return mesh;
}

}  // namespace trixel
