#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/synth.hpp"
#include "trixel/image_io.hpp"
#include "trixel/mesh.hpp"
#include "trixel/trimap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  const char* p = std::getenv("TRIXELSEG_CLI");
  REQUIRE(p != nullptr);
  return p;
}

std::string testdata_dir() {
  const char* p = std::getenv("TRIXELSEG_TESTDATA");
  return p ? p : "";
}

int run_cli(const std::string& args) {
  std::string cmd = "\"" + cli_path() + "\" " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

std::vector<std::uint8_t> slurp(const std::string& path) {
  return trixel::detail::read_file(path);
}

struct CliFixture {
  fs::path dir;

  CliFixture() {
    dir = fs::path("cli_work");
    fs::create_directories(dir);
  }

  std::string write_scene(int index) {
    synth::PersonScene s = synth::make_person_scene(index, 7);
    std::string base = (dir / ("scene" + std::to_string(index))).string();
    trixel::write_png(base + ".png", s.image);
    trixel::write_eyes(base + ".eyes.json", s.eyes);
    trixel::write_png(base + ".gt.png", s.people_gt);
    trixel::write_png(base + ".skin_gt.png", s.skin_gt);
    trixel::write_png(base + ".clothes_gt.png", s.clothes_gt);
    return base;
  }
};

}  // namespace

TEST_CASE_METHOD(CliFixture, "mesh subcommand writes a deterministic dump") {
  trixel::RgbImage img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.set(x, y, 120, 120, 120);
  std::string base = (dir / "uniform").string();
  trixel::write_png(base + ".png", img);

  REQUIRE(run_cli("mesh " + base + ".png --out " + base + ".tritom --overlay " + base +
                  ".overlay.png") == 0);
  trixel::TrixelMesh mesh = trixel::read_mesh(base + ".tritom");
  // uniform image: corners + border sites only (border step 16 on 64px sides)
  CHECK(mesh.vertex_coords.size() == 16);
  CHECK(fs::exists(base + ".overlay.png"));

  auto first = slurp(base + ".tritom");
  REQUIRE(run_cli("mesh " + base + ".png --out " + base + ".tritom") == 0);
  CHECK(slurp(base + ".tritom") == first);
}

TEST_CASE_METHOD(CliFixture, "segment runs the two-stage pipeline end to end") {
  std::string base = write_scene(0);

  SECTION("geometric trimap, trixel engine") {
    REQUIRE(run_cli("segment " + base + ".png --engine tritom --trimap geo --timings 0") == 0);
    CHECK(fs::exists(base + ".skin.png"));
    CHECK(fs::exists(base + ".clothes.png"));
    std::ifstream in(base + ".result.json");
    json j;
    in >> j;
    CHECK(j["skin"]["iterations"].get<int>() >= 1);
    // far fewer units than pixels
    CHECK(j["unit_count"].get<int>() * 10 < 128 * 160);
  }

  SECTION("pixel engine with probabilistic trimaps") {
    // build maps from this scene's own ground truth
    json skin_manifest = json::array();
    json clothes_manifest = json::array();
    skin_manifest.push_back({{"mask", "scene0.skin_gt.png"}, {"eyes", "scene0.eyes.json"}});
    clothes_manifest.push_back(
        {{"mask", "scene0.clothes_gt.png"}, {"eyes", "scene0.eyes.json"}});
    std::ofstream((dir / "skin_masks.json").string()) << skin_manifest.dump();
    std::ofstream((dir / "clothes_masks.json").string()) << clothes_manifest.dump();
    REQUIRE(run_cli("buildmap --masks " + (dir / "skin_masks.json").string() +
                    " --target skin --out " + (dir / "skin_map.png").string()) == 0);
    REQUIRE(run_cli("buildmap --masks " + (dir / "clothes_masks.json").string() +
                    " --target clothes --out " + (dir / "clothes_map.png").string()) == 0);

    REQUIRE(run_cli("segment " + base + ".png --engine pixel --trimap prob --skin-map " +
                    (dir / "skin_map.png").string() + " --clothes-map " +
                    (dir / "clothes_map.png").string() + " --timings 0") == 0);
    CHECK(fs::exists(base + ".skin.png"));
    CHECK(fs::exists(base + ".clothes.png"));
  }

  SECTION("skin-only then clothes-only chain") {
    REQUIRE(run_cli("segment " + base + ".png --engine pixel --trimap geo --stages skin "
                    "--timings 0 --out-prefix " +
                    base + "_st") == 0);
    REQUIRE(fs::exists(base + "_st.skin.png"));
    REQUIRE(run_cli("segment " + base + ".png --engine pixel --trimap geo --stages clothes "
                    "--skin-mask " +
                    base + "_st.skin.png --timings 0 --out-prefix " + base + "_st") == 0);
    CHECK(fs::exists(base + "_st.clothes.png"));

    // clothes-only without the prior mask is a usage error
    CHECK(run_cli("segment " + base + ".png --stages clothes --out-prefix " + base +
                  "_bad") == 5);
  }

  SECTION("missing eyes file exits with code 2") {
    trixel::RgbImage img(64, 64);
    std::string lone = (dir / "noeyes").string();
    trixel::write_png(lone + ".png", img);
    CHECK(run_cli("segment " + lone + ".png") == 2);
  }
}

TEST_CASE_METHOD(CliFixture, "segment output is byte-identical across runs") {
  std::string base = write_scene(1);
  REQUIRE(run_cli("segment " + base + ".png --engine tritom --trimap geo --seed 42 "
                  "--timings 0 --out-prefix " +
                  base + "_a") == 0);
  REQUIRE(run_cli("segment " + base + ".png --engine tritom --trimap geo --seed 42 "
                  "--timings 0 --out-prefix " +
                  base + "_b") == 0);
  CHECK(slurp(base + "_a.skin.png") == slurp(base + "_b.skin.png"));
  CHECK(slurp(base + "_a.clothes.png") == slurp(base + "_b.clothes.png"));
  CHECK(slurp(base + "_a.result.json") == slurp(base + "_b.result.json"));
}

TEST_CASE_METHOD(CliFixture, "segment matches the bundled goldens pixel-exactly") {
  std::string golden_dir = testdata_dir();
  REQUIRE(!golden_dir.empty());
  if (!fs::exists(fs::path(golden_dir) / "golden_skin.png")) {
    WARN("goldens not present; run tools/make_goldens.sh to regenerate");
    return;
  }
  std::string base = write_scene(2);
  REQUIRE(run_cli("segment " + base + ".png --engine tritom --trimap geo --seed 42 "
                  "--timings 0 --out-prefix " +
                  base + "_golden") == 0);
  trixel::Mask skin = trixel::read_mask(base + "_golden.skin.png");
  trixel::Mask clothes = trixel::read_mask(base + "_golden.clothes.png");
  trixel::Mask gskin = trixel::read_mask((fs::path(golden_dir) / "golden_skin.png").string());
  trixel::Mask gclothes =
      trixel::read_mask((fs::path(golden_dir) / "golden_clothes.png").string());
  CHECK(skin.values == gskin.values);
  CHECK(clothes.values == gclothes.values);
}

TEST_CASE_METHOD(CliFixture, "features emits the expected column counts") {
  synth::PersonScene s = synth::make_person_scene(3, 7);
  std::string base = (dir / "feat").string();
  trixel::write_png(base + ".png", s.image);

  REQUIRE(run_cli("features " + base + ".png --kind hs --descriptor lbp --grid 5 --out " +
                  base + "_lbp.csv") == 0);
  std::ifstream in(base + "_lbp.csv");
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(std::count(line.begin(), line.end(), ',') == 6400);

  REQUIRE(run_cli("features " + base + ".png --kind hs --descriptor hog --out " + base +
                  "_hog.csv") == 0);
  std::ifstream in2(base + "_hog.csv");
  REQUIRE(std::getline(in2, line));
  CHECK(std::count(line.begin(), line.end(), ',') == 1764);
}

TEST_CASE_METHOD(CliFixture, "buildmap of a single mask is binary 16-bit") {
  synth::PersonScene s = synth::make_person_scene(4, 7);
  std::string base = (dir / "bm").string();
  trixel::write_png(base + "_mask.png", s.skin_gt);
  trixel::write_eyes(base + ".eyes.json", s.eyes);
  json manifest = json::array();
  manifest.push_back({{"mask", "bm_mask.png"}, {"eyes", "bm.eyes.json"}});
  std::ofstream((dir / "bm_manifest.json").string()) << manifest.dump();

  REQUIRE(run_cli("buildmap --masks " + (dir / "bm_manifest.json").string() +
                  " --target skin --out " + base + "_map.png") == 0);
  trixel::ScalarField map = trixel::read_png_gray16(base + "_map.png");
  for (double v : map.values) CHECK((v == 0.0 || v == 1.0));
  trixel::ProbabilityMap pm = trixel::read_probability_map(base + "_map.png");
  CHECK(pm.target == trixel::MapTarget::Skin);
}

TEST_CASE_METHOD(CliFixture, "cv reports are reproducible for a fixed seed") {
  // a separable feature cue, an external score cue, and the labels
  trixel::Rng rng(5);
  std::ofstream f1((dir / "cueA.csv").string()), scores((dir / "cnn_scores.csv").string()),
      labels((dir / "labels.csv").string());
  for (int i = 0; i < 30; ++i) {
    int y = i % 2 ? 1 : -1;
    f1 << "s" << i << "," << y * 2.0 + rng.normal() * 0.3 << ","
       << y * 2.0 + rng.normal() * 0.3 << "\n";
    scores << "s" << i << "," << y * 1.5 + rng.normal() * 0.5 << "\n";
    labels << "s" << i << "," << (y > 0 ? "M" : "F") << "\n";
  }
  f1.close();
  scores.close();
  labels.close();

  std::string args = "cv --features " + (dir / "cueA.csv").string() + " --scores " +
                     (dir / "cnn_scores.csv").string() + " --labels " +
                     (dir / "labels.csv").string() + " --seed 11 --out ";
  REQUIRE(run_cli(args + (dir / "cv_a.json").string()) == 0);
  REQUIRE(run_cli(args + (dir / "cv_b.json").string()) == 0);
  CHECK(slurp((dir / "cv_a.json").string()) == slurp((dir / "cv_b.json").string()));

  std::ifstream in((dir / "cv_a.json").string());
  json j;
  in >> j;
  REQUIRE(j["cues"].size() == 2);
  CHECK(j["fused"]["mean"].get<double>() >= 0.9);
  CHECK(j["cues"][1]["mean"].get<double>() >= 0.9);  // external scores carry signal
}

TEST_CASE_METHOD(CliFixture, "bench writes reports and is deterministic") {
  std::string b0 = write_scene(5);
  std::string b1 = write_scene(6);
  json manifest = json::array();
  for (const std::string& b : {b0, b1}) {
    fs::path p(b);
    manifest.push_back({{"image", p.filename().string() + ".png"},
                        {"eyes", p.filename().string() + ".eyes.json"},
                        {"gt", p.filename().string() + ".gt.png"}});
  }
  std::ofstream((dir / "manifest.json").string()) << manifest.dump();

  std::string args = "bench --manifest " + (dir / "manifest.json").string() +
                     " --approaches PixelGC_Geo,TriToMGC_Geo --jobs 2 --timings 0 --out ";
  REQUIRE(run_cli(args + (dir / "report_a").string()) == 0);
  REQUIRE(run_cli(args + (dir / "report_b").string()) == 0);

  for (const char* f : {"bench.json", "curve_PixelGC_Geo.csv", "curve_TriToMGC_Geo.csv",
                        "curve_PixelGC_Geo.dat", "table1.csv"}) {
    CHECK(fs::exists(dir / "report_a" / f));
  }
  CHECK(slurp((dir / "report_a" / "bench.json").string()) ==
        slurp((dir / "report_b" / "bench.json").string()));

  std::ifstream in((dir / "report_a" / "bench.json").string());
  json j;
  in >> j;
  CHECK(j["normalized_iterations"]["PixelGC_Geo"].get<double>() == 1.0);
}
