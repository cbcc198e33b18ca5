#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "trixel/error.hpp"
#include "trixel/image.hpp"

namespace trixel {
namespace delaunay {

// Orientation of (a, b, c): positive when c lies left of a->b in the stored
// coordinate sense. Exact for integer-valued coordinates in double range.
inline double orient2d(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// In-circle determinant for d against the circle through (a, b, c) (counter-
// clockwise). Positive => strictly inside. Ties are detected against the sum
// of absolute determinant terms, i.e. a normalized determinant tolerance, so
// cocircular quads land in the tie band at any coordinate scale.
constexpr double kInCircleTolRel = 1e-9;

inline bool strictly_inside_circumcircle(const Point& a, const Point& b, const Point& c,
                                         const Point& d) {
  double adx = a.x - d.x, ady = a.y - d.y;
  double bdx = b.x - d.x, bdy = b.y - d.y;
  double cdx = c.x - d.x, cdy = c.y - d.y;
  double ad = adx * adx + ady * ady;
  double bd = bdx * bdx + bdy * bdy;
  double cd = cdx * cdx + cdy * cdy;
  double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
               ad * (bdx * cdy - bdy * cdx);
  double mag = std::abs(adx) * (std::abs(bdy * cd) + std::abs(bd * cdy)) +
               std::abs(ady) * (std::abs(bdx * cd) + std::abs(bd * cdx)) +
               ad * (std::abs(bdx * cdy) + std::abs(bdy * cdx));
  return det > kInCircleTolRel * mag;
}

struct Triangle {
  int v[3];
  bool alive = true;
};

/// Incremental Bowyer-Watson triangulation. Points are inserted in the given
/// order; a point on an existing circumcircle (within tolerance) does not
/// retriangulate it, so cocircular ties resolve in favor of earlier
/// insertions.
class Triangulator {
 public:
  explicit Triangulator(const std::vector<Point>& points) : pts_(points) {
    require(pts_.size() >= 3, Errc::TooFewVertices, "need at least 3 vertices");
    // far super-triangle; exact powers of two keep the arithmetic clean
    const double big = 16777216.0;  // 2^24
    super_base_ = int(pts_.size());
    pts_.push_back({-big, -big});
    pts_.push_back({3.0 * big, -big});
    pts_.push_back({0.0, 3.0 * big});
    make_triangle(super_base_, super_base_ + 1, super_base_ + 2);
    for (int i = 0; i < super_base_; ++i) insert(i);
  }

  /// Triangles over the real points only, canonically ordered.
  std::vector<std::array<int, 3>> triangles() const {
    std::vector<std::array<int, 3>> out;
    for (const Triangle& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= super_base_ || t.v[1] >= super_base_ || t.v[2] >= super_base_) continue;
      std::array<int, 3> v{t.v[0], t.v[1], t.v[2]};
      std::sort(v.begin(), v.end());
      out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct EdgeSlot {
    int first = -1;
    int second = -1;
  };

  static std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
  }

  void map_edge(int a, int b, int tri) {
    EdgeSlot& slot = edges_[edge_key(a, b)];
    if (slot.first == -1) slot.first = tri;
    else slot.second = tri;
  }

  void unmap_edge(int a, int b, int tri) {
    auto it = edges_.find(edge_key(a, b));
    if (it == edges_.end()) return;
    if (it->second.first == tri) it->second.first = it->second.second;
    it->second.second = -1;
    if (it->second.first == -1) edges_.erase(it);
  }

  int neighbor(int a, int b, int tri) const {
    auto it = edges_.find(edge_key(a, b));
    if (it == edges_.end()) return -1;
    if (it->second.first != tri) return it->second.first;
    return it->second.second;
  }

  int make_triangle(int a, int b, int c) {
    if (orient2d(pts_[a], pts_[b], pts_[c]) < 0.0) std::swap(b, c);
    int id = int(tris_.size());
    tris_.push_back({{a, b, c}, true});
    map_edge(a, b, id);
    map_edge(b, c, id);
    map_edge(c, a, id);
    return id;
  }

  void kill_triangle(int id) {
    Triangle& t = tris_[id];
    t.alive = false;
    unmap_edge(t.v[0], t.v[1], id);
    unmap_edge(t.v[1], t.v[2], id);
    unmap_edge(t.v[2], t.v[0], id);
  }

  // walk toward p from the last created triangle; falls back to a scan if the
  // walk stalls
  int locate(const Point& p) const {
    int cur = int(tris_.size()) - 1;
    while (cur >= 0 && !tris_[cur].alive) --cur;
    int steps = 0, limit = int(tris_.size()) * 4 + 64;
    while (cur >= 0 && steps++ < limit) {
      const Triangle& t = tris_[cur];
      int next = -1;
      for (int e = 0; e < 3; ++e) {
        int a = t.v[e], b = t.v[(e + 1) % 3];
        if (orient2d(pts_[a], pts_[b], p) < 0.0) {
          next = neighbor(a, b, cur);
          break;
        }
      }
      if (next == -1) return cur;
      cur = next;
    }
    for (int id = int(tris_.size()) - 1; id >= 0; --id) {
      if (!tris_[id].alive) continue;
      const Triangle& t = tris_[id];
      if (orient2d(pts_[t.v[0]], pts_[t.v[1]], p) >= 0.0 &&
          orient2d(pts_[t.v[1]], pts_[t.v[2]], p) >= 0.0 &&
          orient2d(pts_[t.v[2]], pts_[t.v[0]], p) >= 0.0)
        return id;
    }
    fail(Errc::BadFormat, "triangulation: point outside the super-triangle");
  }

  void insert(int pi) {
    const Point& p = pts_[pi];
    int seed = locate(p);

    // cavity: all triangles whose circumcircle strictly contains p,
    // edge-connected to the containing triangle
    std::vector<int> cavity;
    std::vector<int> stack{seed};
    std::vector<char> seen(tris_.size(), 0);
    seen[seed] = 1;
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Triangle& t = tris_[id];
      bool in_cavity =
          id == seed ||
          strictly_inside_circumcircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p);
      if (!in_cavity) continue;
      cavity.push_back(id);
      for (int e = 0; e < 3; ++e) {
        int n = neighbor(t.v[e], t.v[(e + 1) % 3], id);
        if (n >= 0 && !seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
      }
    }

    // boundary = cavity edges whose other side is outside the cavity
    std::vector<char> in_cav(tris_.size(), 0);
    for (int id : cavity) in_cav[id] = 1;
    std::vector<std::pair<int, int>> rim;
    for (int id : cavity) {
      const Triangle& t = tris_[id];
      for (int e = 0; e < 3; ++e) {
        int a = t.v[e], b = t.v[(e + 1) % 3];
        int n = neighbor(a, b, id);
        if (n == -1 || !in_cav[n]) rim.push_back({a, b});
      }
    }
    for (int id : cavity) kill_triangle(id);
    for (const auto& [a, b] : rim) {
      if (std::abs(orient2d(pts_[a], pts_[b], p)) == 0.0) continue;  // degenerate sliver
      make_triangle(a, b, pi);
    }
  }

  std::vector<Point> pts_;
  std::vector<Triangle> tris_;
  std::unordered_map<std::uint64_t, EdgeSlot> edges_{};
  int super_base_ = 0;
};

}  // namespace delaunay
}  // namespace trixel
