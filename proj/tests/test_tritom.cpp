#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "support/oracles.hpp"
#include "trixel/dmum.hpp"
#include "trixel/image.hpp"
#include "trixel/image_io.hpp"
#include "trixel/mesh.hpp"
#include "trixel/rng.hpp"

using namespace trixel;

namespace {

ScalarField step_edge_field(int w, int h, int step) {
  ScalarField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.at(x, y) = x < step ? 0.0 : 255.0;
  return f;
}

RgbImage step_edge_image(int w, int h, int step) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = x < step ? 40.0 : 210.0;
      img.set(x, y, v, v, v);
    }
  return img;
}

}  // namespace

TEST_CASE("dmum of a constant image is the seed cost everywhere") {
  DmumParams params;
  ScalarField gray(32, 24, 77.0);
  ScalarField d = compute_dmum(gray, params);
  for (double v : d.values) CHECK(v == params.seed_scale);
}

TEST_CASE("dmum matches the exhaustive min formula") {
  DmumParams params;

  SECTION("single unit-magnitude source in a 9x9 zero field") {
    ScalarField mag(9, 9, 0.0);
    mag.at(4, 4) = 1.0;
    ScalarField d = compute_dmum_from_magnitude(mag, params);
    ScalarField ref = oracle::dmum_reference(mag, params.seed_scale);
    for (std::size_t i = 0; i < d.values.size(); ++i)
      CHECK(d.values[i] == ref.values[i]);
  }

  SECTION("random magnitude fields") {
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
      ScalarField mag(17, 11);
      for (double& v : mag.values) v = rng.next_double();
      ScalarField d = compute_dmum_from_magnitude(mag, params);
      ScalarField ref = oracle::dmum_reference(mag, params.seed_scale);
      for (std::size_t i = 0; i < d.values.size(); ++i)
        CHECK(d.values[i] == Catch::Approx(ref.values[i]).margin(1e-12));
    }
  }
}

TEST_CASE("dmum ridge forms midway between two parallel edges") {
  DmumParams params;
  ScalarField mag(17, 9, 0.0);
  for (int y = 0; y < 9; ++y) {
    mag.at(4, y) = 1.0;
    mag.at(12, y) = 1.0;
  }
  ScalarField d = compute_dmum_from_magnitude(mag, params);
  for (int y = 0; y < 9; ++y) {
    // rises toward the middle column, falls past it
    for (int x = 5; x <= 8; ++x) CHECK(d.at(x, y) >= d.at(x - 1, y) - 1e-12);
    for (int x = 9; x <= 12; ++x) CHECK(d.at(x, y) <= d.at(x - 1, y) + 1e-12);
    CHECK(d.at(8, y) > d.at(5, y));
    CHECK(d.at(8, y) > d.at(11, y));
  }
}

TEST_CASE("constant image yields only corner and border vertices") {
  DmumParams params;  // border_step 16
  ScalarField gray(40, 40, 10.0);
  ScalarField d = compute_dmum(gray, params);
  auto verts = extract_vertices(d, params);

  std::set<std::pair<int, int>> got;
  for (const Point& p : verts) got.insert({int(p.x), int(p.y)});
  std::set<std::pair<int, int>> expect = {{0, 0},  {39, 0}, {0, 39}, {39, 39},
                                          {16, 0}, {32, 0}, {16, 39}, {32, 39},
                                          {0, 16}, {0, 32}, {39, 16}, {39, 32}};
  CHECK(got == expect);
}

TEST_CASE("step edge vertices string along the edge at the suppression spacing") {
  DmumParams params;
  ScalarField gray = step_edge_field(40, 40, 20);
  ScalarField d = compute_dmum(gray, params);
  auto verts = extract_vertices(d, params);

  std::vector<Point> interior;
  for (const Point& p : verts)
    if (p.x > 0 && p.x < 39 && p.y > 0 && p.y < 39) interior.push_back(p);
  REQUIRE(interior.size() >= 5);
  for (const Point& p : interior) CHECK((p.x == 19.0 || p.x == 20.0));
  for (std::size_t i = 0; i < interior.size(); ++i)
    for (std::size_t j = i + 1; j < interior.size(); ++j)
      CHECK(dist(interior[i], interior[j]) >= params.min_spacing);
}

TEST_CASE("interior minima of noisy fields respect the suppression radius") {
  DmumParams params;
  Rng rng(1234);
  ScalarField gray(64, 48);
  for (double& v : gray.values) v = double(rng.next_below(256));
  ScalarField d = compute_dmum(gray, params);
  auto verts = extract_vertices(d, params);

  std::vector<Point> interior;
  for (const Point& p : verts)
    if (p.x > 0 && p.x < 63 && p.y > 0 && p.y < 47) interior.push_back(p);
  for (std::size_t i = 0; i < interior.size(); ++i)
    for (std::size_t j = i + 1; j < interior.size(); ++j)
      CHECK(dist(interior[i], interior[j]) >= params.min_spacing);
}

TEST_CASE("four rectangle corners triangulate into two mutually adjacent trixels") {
  std::vector<Point> pts = {{0, 0}, {15, 0}, {0, 9}, {15, 9}};
  TrixelMesh mesh = triangulate(pts, 16, 10);
  REQUIRE(mesh.trixels.size() == 2);
  CHECK(mesh.trixels[0].neighbors == std::vector<int>{1});
  CHECK(mesh.trixels[1].neighbors == std::vector<int>{0});
}

TEST_CASE("four corners plus center fan into four trixels with two neighbors each") {
  std::vector<Point> pts = {{0, 0}, {15, 0}, {0, 9}, {15, 9}, {7, 5}};
  TrixelMesh mesh = triangulate(pts, 16, 10);
  REQUIRE(mesh.trixels.size() == 4);
  for (const Trixel& t : mesh.trixels) CHECK(t.neighbors.size() == 2);
}

TEST_CASE("duplicate and too-few vertices") {
  std::vector<Point> dup = {{0, 0}, {15, 0}, {0, 9}, {15, 9}, {15, 0}, {0, 0}};
  TrixelMesh mesh = triangulate(dup, 16, 10);
  CHECK(mesh.vertex_coords.size() == 4);
  CHECK(mesh.trixels.size() == 2);

  CHECK_THROWS_AS(triangulate({{0, 0}, {1, 1}, {0, 0}}, 4, 4), Error);
  CHECK_THROWS_AS(triangulate({{0, 0}, {1, 1}, {2, 2}, {3, 3}}, 4, 4), Error);  // collinear
}

TEST_CASE("triangulations satisfy the empty-circumcircle oracle") {
  SECTION("random integer point sets") {
    Rng rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
      int n = 10 + int(rng.next_below(150));
      std::set<std::pair<int, int>> uniq;
      uniq.insert({0, 0});
      uniq.insert({63, 0});
      uniq.insert({0, 63});
      uniq.insert({63, 63});
      while (int(uniq.size()) < n)
        uniq.insert({int(rng.next_below(64)), int(rng.next_below(64))});
      std::vector<Point> pts;
      for (auto& [x, y] : uniq) pts.push_back({double(x), double(y)});
      TrixelMesh mesh = triangulate(pts, 64, 64);
      INFO("trial " << trial << " with " << pts.size() << " points");
      CHECK(oracle::is_delaunay(mesh));
    }
  }

  SECTION("regular grid (heavily cocircular)") {
    std::vector<Point> pts;
    for (int y = 0; y <= 48; y += 8)
      for (int x = 0; x <= 48; x += 8) pts.push_back({double(x), double(y)});
    TrixelMesh mesh = triangulate(pts, 49, 49);
    CHECK(oracle::is_delaunay(mesh));
    CHECK(mesh.trixels.size() == 72);  // 6x6 cells, two triangles each
  }

  SECTION("full pipeline meshes stay under the oracle budget") {
    RgbImage img = step_edge_image(48, 48, 24);
    DmumParams params;
    TrixelMesh mesh = build_mesh(img, params);
    REQUIRE(mesh.vertex_coords.size() <= 200);
    CHECK(oracle::is_delaunay(mesh));
  }
}

TEST_CASE("rasterization partitions the image and averages colors") {
  SECTION("uniform image, two trixels") {
    std::vector<Point> pts = {{0, 0}, {15, 0}, {0, 9}, {15, 9}};
    TrixelMesh mesh = triangulate(pts, 16, 10);
    RgbImage img(16, 10);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 16; ++x) img.set(x, y, 30, 90, 150);
    rasterize_and_summarize(mesh, img);
    std::size_t total = 0;
    for (const Trixel& t : mesh.trixels) {
      total += t.pixel_members.size();
      CHECK(t.mean_color[0] == Catch::Approx(30.0));
      CHECK(t.mean_color[1] == Catch::Approx(90.0));
      CHECK(t.mean_color[2] == Catch::Approx(150.0));
    }
    CHECK(total == 160);
  }

  SECTION("half red, half blue splits exactly on a mid-edge mesh") {
    // shared edges at x = 4.5 keep pixel centers off the boundary
    std::vector<Point> pts = {{0, 0}, {4.5, 0}, {9, 0}, {0, 4}, {4.5, 4}, {9, 4}};
    TrixelMesh mesh = triangulate(pts, 10, 5);
    RgbImage img(10, 5);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 10; ++x) {
        if (x <= 4)
          img.set(x, y, 255, 0, 0);
        else
          img.set(x, y, 0, 0, 255);
      }
    rasterize_and_summarize(mesh, img);
    for (const Trixel& t : mesh.trixels) {
      if (t.pixel_members.empty()) continue;
      bool left = t.centroid.x < 4.5;
      CHECK(t.mean_color[0] == (left ? 255.0 : 0.0));
      CHECK(t.mean_color[2] == (left ? 0.0 : 255.0));
    }
  }

  SECTION("partition holds on a pipeline mesh") {
    RgbImage img = step_edge_image(60, 44, 30);
    TrixelMesh mesh = build_mesh(img, {});
    std::size_t total = 0;
    for (const Trixel& t : mesh.trixels) total += t.pixel_members.size();
    CHECK(total == mesh.pixel_count());
  }
}

TEST_CASE("adjacency is symmetric with at most three neighbors") {
  Rng rng(31);
  RgbImage img(72, 56);
  for (double& v : img.data) v = double(rng.next_below(256));
  TrixelMesh mesh = build_mesh(img, {});
  for (const Trixel& t : mesh.trixels) {
    CHECK(t.neighbors.size() <= 3);
    for (int n : t.neighbors) {
      const auto& back = mesh.trixels[n].neighbors;
      CHECK(std::find(back.begin(), back.end(), t.id) != back.end());
    }
  }
}

TEST_CASE("meshes resolve finer near contours") {
  RgbImage img = step_edge_image(96, 96, 48);
  TrixelMesh mesh = build_mesh(img, {});
  std::vector<double> near, far;
  for (const Trixel& t : mesh.trixels) {
    double area = triangle_area(mesh.vertex_coords[t.vertices[0]],
                                mesh.vertex_coords[t.vertices[1]],
                                mesh.vertex_coords[t.vertices[2]]);
    if (std::abs(t.centroid.x - 47.5) <= 5.0)
      near.push_back(area);
    else
      far.push_back(area);
  }
  REQUIRE(!near.empty());
  REQUIRE(!far.empty());
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(median(near) < median(far));
}

TEST_CASE("mesh construction is deterministic") {
  Rng rng(77);
  RgbImage img(50, 40);
  for (double& v : img.data) v = double(rng.next_below(256));
  TrixelMesh a = build_mesh(img, {});
  TrixelMesh b = build_mesh(img, {});
  REQUIRE(a.trixels.size() == b.trixels.size());
  for (std::size_t i = 0; i < a.trixels.size(); ++i) {
    CHECK(a.trixels[i].vertices == b.trixels[i].vertices);
    CHECK(a.trixels[i].pixel_members == b.trixels[i].pixel_members);
  }
}

TEST_CASE("mesh dump round-trips through the text format") {
  RgbImage img = step_edge_image(40, 30, 17);
  TrixelMesh mesh = build_mesh(img, {});
  write_mesh("tritom_rt.tritom", mesh);
  TrixelMesh back = read_mesh("tritom_rt.tritom");
  REQUIRE(back.trixels.size() == mesh.trixels.size());
  for (std::size_t i = 0; i < mesh.trixels.size(); ++i) {
    CHECK(back.trixels[i].vertices == mesh.trixels[i].vertices);
    CHECK(back.trixels[i].neighbors == mesh.trixels[i].neighbors);
  }
  rasterize_and_summarize(back, img);
  for (std::size_t i = 0; i < mesh.trixels.size(); ++i)
    CHECK(back.trixels[i].pixel_members == mesh.trixels[i].pixel_members);

  // byte-identical on re-dump
  write_mesh("tritom_rt2.tritom", back);
  auto d1 = trixel::detail::read_file("tritom_rt.tritom");
  auto d2 = trixel::detail::read_file("tritom_rt2.tritom");
  CHECK(d1 == d2);
}
