#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <string>

#include "trixel/image.hpp"
#include "trixel/image_io.hpp"
#include "trixel/rng.hpp"

using namespace trixel;

namespace {

std::string tmp_path(const std::string& name) {
  return "imaging_" + name;
}

}  // namespace

TEST_CASE("grayscale uses the luma weights") {
  RgbImage img(3, 1);
  img.set(0, 0, 255, 255, 255);
  img.set(1, 0, 0, 0, 0);
  img.set(2, 0, 100, 200, 50);
  ScalarField g = to_grayscale(img);
  CHECK(g.at(0, 0) == Catch::Approx(255.0));
  CHECK(g.at(1, 0) == Catch::Approx(0.0));
  CHECK(g.at(2, 0) == Catch::Approx(153.0));
}

TEST_CASE("grayscale is idempotent on gray triples") {
  Rng rng(7);
  RgbImage img(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      double v = double(rng.next_below(256));
      img.set(x, y, v, v, v);
    }
  ScalarField g = to_grayscale(img);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      CHECK(g.at(x, y) == Catch::Approx(img.px(x, y)[0]).margin(1e-12));
}

TEST_CASE("gradient magnitude of a constant image is zero") {
  ScalarField f(9, 7, 42.0);
  ScalarField m = gradient_magnitude(f);
  for (double v : m.values) CHECK(v == 0.0);
}

TEST_CASE("gradient magnitude peaks on the two columns flanking a step") {
  const int w = 10, h = 6, step = 5;  // x < step -> 0, x >= step -> 255
  ScalarField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.at(x, y) = x < step ? 0.0 : 255.0;
  ScalarField m = gradient_magnitude(f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x == step - 1 || x == step)
        CHECK(m.at(x, y) == Catch::Approx(1.0));
      else
        CHECK(m.at(x, y) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("gradient magnitude rings around an isolated bright pixel") {
  ScalarField f(9, 9, 0.0);
  f.at(4, 4) = 255.0;
  ScalarField m = gradient_magnitude(f);
  CHECK(m.at(4, 4) == Catch::Approx(0.0).margin(1e-12));  // symmetric stencil cancels
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      CHECK(m.at(4 + dx, 4 + dy) > 0.0);
    }
  CHECK(m.at(0, 0) == 0.0);
  for (double v : m.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("gradient magnitude rejects tiny images") {
  ScalarField f(2, 5, 0.0);
  CHECK_THROWS_AS(gradient_magnitude(f), Error);
}

TEST_CASE("alignment with eyes already canonical is the identity") {
  CanonicalFrame frame;  // 256x256, midpoint (128, 80), d0 = 40
  RgbImage img(256, 256);
  Rng rng(3);
  for (double& v : img.data) v = double(rng.next_below(256));
  EyePair eyes{{108.0, 80.0}, {148.0, 80.0}};
  RgbImage out = align_to_frame(img, eyes, frame);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(out.data[i] == Catch::Approx(img.data[i]).margin(1e-9));
}

TEST_CASE("alignment is equivariant under an exact quarter turn") {
  CanonicalFrame frame;
  const int n = 100;
  Mask m(n, n);
  for (int y = 20; y < 60; ++y)
    for (int x = 30; x < 45; ++x) m.at(x, y) = 255;
  for (int y = 55; y < 65; ++y)
    for (int x = 30; x < 80; ++x) m.at(x, y) = 255;
  // distance d0 so sampling hits exact grid positions (no rounding ties)
  EyePair eyes{{30.0, 40.0}, {70.0, 40.0}};

  // quarter turn clockwise about the canvas center: (x, y) -> (n-1-y, x)
  Mask rot(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) rot.at(n - 1 - y, x) = m.at(x, y);
  auto rot_pt = [&](Point p) { return Point{double(n - 1) - p.y, p.x}; };
  EyePair rot_eyes{rot_pt(eyes.left), rot_pt(eyes.right)};

  Mask a = align_to_frame(m, eyes, frame);
  Mask b = align_to_frame(rot, rot_eyes, frame);
  REQUIRE(a.values.size() == b.values.size());
  CHECK(a.values == b.values);
}

TEST_CASE("doubling the eye distance shrinks mask area fourfold") {
  CanonicalFrame frame;
  const int n = 200;
  Mask m(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double dx = x - 100.0, dy = y - 100.0;
      if (dx * dx + dy * dy <= 30.0 * 30.0) m.at(x, y) = 255;
    }
  EyePair wide{{60.0, 100.0}, {140.0, 100.0}};  // distance 80 = 2 * d0
  Mask aligned = align_to_frame(m, wide, frame);
  double ratio = double(aligned.area()) / double(m.area());
  CHECK(ratio == Catch::Approx(0.25).epsilon(0.05));
}

TEST_CASE("coincident eyes are rejected") {
  CanonicalFrame frame;
  Mask m(10, 10);
  EyePair eyes{{5.0, 5.0}, {5.2, 5.0}};
  CHECK_THROWS_AS(align_to_frame(m, eyes, frame), Error);
}

TEST_CASE("png round-trips rgb, gray mask and 16-bit maps") {
  Rng rng(11);

  RgbImage img(37, 23);
  for (double& v : img.data) v = double(rng.next_below(256));
  write_png(tmp_path("rt.png"), img);
  RgbImage back = read_image(tmp_path("rt.png"));
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  CHECK(back.data == img.data);

  Mask m(19, 31);
  for (auto& v : m.values) v = rng.next_below(2) ? 255 : 0;
  write_png(tmp_path("rt_mask.png"), m);
  Mask mb = read_mask(tmp_path("rt_mask.png"));
  CHECK(mb.values == m.values);

  ScalarField f(13, 9);
  for (double& v : f.values) v = rng.next_double();
  write_png_gray16(tmp_path("rt16.png"), f);
  ScalarField fb = read_png_gray16(tmp_path("rt16.png"));
  REQUIRE(fb.values.size() == f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(fb.values[i] == Catch::Approx(f.values[i]).margin(1.0 / 65535.0));
}

TEST_CASE("ppm round-trip") {
  Rng rng(5);
  RgbImage img(8, 5);
  for (double& v : img.data) v = double(rng.next_below(256));
  write_image(tmp_path("rt.ppm"), img);
  RgbImage back = read_image(tmp_path("rt.ppm"));
  CHECK(back.data == img.data);
}

TEST_CASE("pgm writes the gray conversion and reads back gray triples") {
  RgbImage img(6, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      double v = double(x * 4 + y * 25);
      img.set(x, y, v, v, v);
    }
  write_image(tmp_path("rt.pgm"), img);
  RgbImage back = read_image(tmp_path("rt.pgm"));
  REQUIRE(back.width == 6);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      CHECK(back.px(x, y)[0] == img.px(x, y)[0]);
      CHECK(back.px(x, y)[0] == back.px(x, y)[1]);
    }
}

TEST_CASE("masks with intermediate values are rejected on read") {
  ScalarField f(6, 6, 128.0);
  write_png_gray(tmp_path("badmask.png"), f);
  CHECK_THROWS_AS(read_mask(tmp_path("badmask.png")), Error);
}

TEST_CASE("eye sidecar json round-trip") {
  EyePair eyes{{12.5, 30.25}, {47.0, 31.5}};
  write_eyes(tmp_path("eyes.json"), eyes);
  EyePair back = read_eyes(tmp_path("eyes.json"));
  CHECK(back.left.x == eyes.left.x);
  CHECK(back.left.y == eyes.left.y);
  CHECK(back.right.x == eyes.right.x);
  CHECK(back.right.y == eyes.right.y);
}
