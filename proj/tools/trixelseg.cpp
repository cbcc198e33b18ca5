// trixelseg: triangular-superpixel segmentation pipeline
//
// subcommands: mesh, segment, bench, features, buildmap, cv
// exit codes: 0 ok, 1 unexpected error, 2 missing input / I/O failure,
//             3 bad arguments, 4 degenerate eyes, 5 empty trimap class,
//             6 image or mesh too small, 7 malformed file

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trixel/classify.hpp"
#include "trixel/descriptors.hpp"
#include "trixel/eval.hpp"
#include "trixel/grabcut.hpp"
#include "trixel/image_io.hpp"
#include "trixel/mesh.hpp"
#include "trixel/trimap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trixel;

namespace {

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::IoFailure: return 2;
    case Errc::BadFormat:
    case Errc::DimMismatch:
    case Errc::LayoutMismatch:
    case Errc::LengthMismatch: return 7;
    case Errc::DegenerateEyes: return 4;
    case Errc::EmptyForeground:
    case Errc::EmptyBackground:
    case Errc::EmptyClass:
    case Errc::EmptyMask:
    case Errc::SingleClass: return 5;
    case Errc::ImageTooSmall:
    case Errc::TooFewVertices:
    case Errc::MeshMismatch: return 6;
    default: return 1;
  }
}

std::string strip_extension(const std::string& path) {
  fs::path p(path);
  p.replace_extension();
  return p.string();
}

std::string default_eyes_path(const std::string& image_path) {
  return strip_extension(image_path) + ".eyes.json";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), Errc::IoFailure, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(Errc::BadFormat, path + ": " + e.what());
  }
  return j;
}

// ---- shared pipeline configuration ------------------------------------------

struct PipelineOptions {
  BenchConfig bench;  // owns everything except the maps
  ProbabilityMap skin_map, clothes_map;
  bool have_skin_map = false, have_clothes_map = false;
  bool with_timings = true;

  void attach_maps() {
    if (have_skin_map) bench.skin_map = &skin_map;
    if (have_clothes_map) bench.clothes_map = &clothes_map;
  }
};

void apply_config_file(PipelineOptions& opt, const std::string& path) {
  json j = load_json_file(path);
  auto get = [&](const char* section, const char* key, auto setter) {
    if (j.contains(section) && j[section].contains(key)) setter(j[section][key]);
  };
  for (GrabCutConfig* gc : {&opt.bench.pixel_grabcut, &opt.bench.trixel_grabcut}) {
    const char* sec = gc == &opt.bench.pixel_grabcut ? "pixel_grabcut" : "trixel_grabcut";
    get(sec, "components", [&](const json& v) { gc->components = v.get<int>(); });
    get(sec, "gamma", [&](const json& v) { gc->gamma = v.get<double>(); });
    get(sec, "max_iters", [&](const json& v) { gc->max_iters = v.get<int>(); });
    get(sec, "convergence_tol", [&](const json& v) { gc->convergence_tol = v.get<double>(); });
    get(sec, "variance_floor", [&](const json& v) { gc->variance_floor = v.get<double>(); });
    get(sec, "area_weighting", [&](const json& v) { gc->area_weighting = v.get<bool>(); });
    get(sec, "seed", [&](const json& v) { gc->seed = v.get<std::uint64_t>(); });
  }
  get("dmum", "seed_scale", [&](const json& v) { opt.bench.dmum.seed_scale = v.get<double>(); });
  get("dmum", "min_spacing", [&](const json& v) { opt.bench.dmum.min_spacing = v.get<int>(); });
  get("dmum", "border_step", [&](const json& v) { opt.bench.dmum.border_step = v.get<int>(); });
  get("prob", "eps_fg", [&](const json& v) { opt.bench.prob_params.eps_fg = v.get<double>(); });
  get("prob", "eps_bg", [&](const json& v) { opt.bench.prob_params.eps_bg = v.get<double>(); });
  if (j.contains("trixel_floor_auto")) opt.bench.trixel_floor_auto = j["trixel_floor_auto"].get<bool>();
}

// flags shared by segment and bench; an explicitly passed flag overrides the
// config file, which overrides the defaults
struct PipelineFlags {
  std::string config_path;
  std::string skin_map_path, clothes_map_path;
  std::uint64_t seed = 42;
  int timings = 1;
  int trixel_floor_auto = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* floor_opt = nullptr;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flag > file > default)");
    cmd->add_option("--skin-map", skin_map_path, "skin probability map PNG (prob trimaps)");
    cmd->add_option("--clothes-map", clothes_map_path,
                    "clothes probability map PNG (prob trimaps)");
    seed_opt = cmd->add_option("--seed", seed, "RNG seed for the color models")
                   ->capture_default_str();
    cmd->add_option("--timings", timings, "include wall-clock timings in reports (0/1)")
        ->capture_default_str();
    floor_opt =
        cmd->add_option("--trixel-auto-floor", trixel_floor_auto,
                        "trixel engine: raise the variance floor to the within-trixel variance")
            ->capture_default_str();
  }

  PipelineOptions resolve() const {
    PipelineOptions opt;
    if (!config_path.empty()) apply_config_file(opt, config_path);
    if (seed_opt && seed_opt->count() > 0) {
      opt.bench.pixel_grabcut.seed = seed;
      opt.bench.trixel_grabcut.seed = seed;
    }
    if (floor_opt && floor_opt->count() > 0)
      opt.bench.trixel_floor_auto = trixel_floor_auto != 0;
    opt.with_timings = timings != 0;
    if (!skin_map_path.empty()) {
      opt.skin_map = read_probability_map(skin_map_path);
      opt.have_skin_map = true;
    }
    if (!clothes_map_path.empty()) {
      opt.clothes_map = read_probability_map(clothes_map_path);
      opt.have_clothes_map = true;
    }
    opt.attach_maps();
    return opt;
  }
};

// ---- mesh -------------------------------------------------------------------

void draw_line(RgbImage& img, Point a, Point b, double r, double g, double bl) {
  int steps = int(std::max(std::abs(b.x - a.x), std::abs(b.y - a.y))) + 1;
  for (int i = 0; i <= steps; ++i) {
    double t = double(i) / steps;
    int x = int(std::lround(a.x + t * (b.x - a.x)));
    int y = int(std::lround(a.y + t * (b.y - a.y)));
    if (img.in_bounds(x, y)) img.set(x, y, r, g, bl);
  }
}

int cmd_mesh(const std::string& image_path, const std::string& out_path,
             const std::string& overlay_path, const DmumParams& params) {
  RgbImage img = read_image(image_path);
  TrixelMesh mesh = build_mesh(img, params);
  write_mesh(out_path, mesh);
  if (!overlay_path.empty()) {
    RgbImage overlay = img;
    for (const Trixel& t : mesh.trixels)
      for (int e = 0; e < 3; ++e)
        draw_line(overlay, mesh.vertex_coords[t.vertices[e]],
                  mesh.vertex_coords[t.vertices[(e + 1) % 3]], 255, 220, 40);
    write_png(overlay_path, overlay);
  }
  std::cout << "mesh: " << mesh.vertex_coords.size() << " vertices, " << mesh.trixels.size()
            << " trixels over " << img.width << "x" << img.height << " ("
            << 100.0 * double(mesh.trixels.size()) / double(img.pixel_count())
            << "% of pixels)\n";
  return 0;
}

// ---- segment ----------------------------------------------------------------

int cmd_segment(const std::string& image_path, std::string eyes_path, std::string out_prefix,
                const std::string& engine, const std::string& trimap_kind,
                const std::string& stages, const std::string& skin_mask_path,
                const PipelineFlags& flags) {
  PipelineOptions opt = flags.resolve();
  RgbImage img = read_image(image_path);
  if (eyes_path.empty()) eyes_path = default_eyes_path(image_path);
  EyePair eyes = read_eyes(eyes_path);
  if (out_prefix.empty()) out_prefix = strip_extension(image_path);

  bool trixels = engine == "tritom";
  bool prob = trimap_kind == "prob";
  Approach approach = trixels ? (prob ? Approach::TriToMGC_Prob : Approach::TriToMGC_Geo)
                              : (prob ? Approach::PixelGC_Prob : Approach::PixelGC_Geo);

  TrixelMesh mesh;
  const TrixelMesh* mesh_ptr = nullptr;
  StageTimings mesh_timing;
  if (trixels) {
    auto t0 = std::chrono::steady_clock::now();
    mesh = build_mesh(img, opt.bench.dmum);
    mesh_timing.mesh_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    mesh_ptr = &mesh;
  }

  json result;
  result["engine"] = engine;
  result["trimap"] = trimap_kind;

  auto stage_json = [&](const SegmentationResult& r) {
    json j = result_to_json(r, opt.with_timings);
    return j;
  };

  if (stages == "both") {
    TwoStageOutput out = run_two_stage(img, eyes, approach, opt.bench, mesh_ptr);
    out.skin_result.timings.mesh_ms = mesh_timing.mesh_ms;
    write_png(out_prefix + ".skin.png", out.skin);
    write_png(out_prefix + ".clothes.png", out.clothes);
    result["skin"] = stage_json(out.skin_result);
    result["clothes"] = stage_json(out.clothes_result);
    result["unit_count"] = out.skin_result.unit_count;
  } else {
    UnitMode mode = trixels ? UnitMode::Trixel : UnitMode::Pixel;
    GrabCutConfig gc = opt.bench.grabcut_for(approach, mesh_ptr, img);
    if (stages == "skin") {
      Trimap tm = prob ? probabilistic_trimap(img.width, img.height, eyes, *opt.bench.skin_map,
                                              opt.bench.prob_params, Stage::Skin, nullptr,
                                              mesh_ptr)
                       : geometric_trimap(img.width, img.height, eyes, opt.bench.geo_template,
                                          Stage::Skin, nullptr, mesh_ptr);
      SegmentationResult r = segment(img, tm, mode, gc, mesh_ptr);
      r.timings.mesh_ms = mesh_timing.mesh_ms;
      write_png(out_prefix + ".skin.png", r.mask);
      result["skin"] = stage_json(r);
      result["unit_count"] = r.unit_count;
    } else if (stages == "clothes") {
      require(!skin_mask_path.empty(), Errc::EmptyMask,
              "clothes-only stage needs --skin-mask");
      Mask skin = read_mask(skin_mask_path);
      Trimap tm = prob ? probabilistic_trimap(img.width, img.height, eyes,
                                              *opt.bench.clothes_map, opt.bench.prob_params,
                                              Stage::Clothes, &skin, mesh_ptr)
                       : geometric_trimap(img.width, img.height, eyes, opt.bench.geo_template,
                                          Stage::Clothes, &skin, mesh_ptr);
      SegmentationResult r = segment(img, tm, mode, gc, mesh_ptr);
      r.timings.mesh_ms = mesh_timing.mesh_ms;
      write_png(out_prefix + ".clothes.png", r.mask);
      result["clothes"] = stage_json(r);
      result["unit_count"] = r.unit_count;
    } else {
      fail(Errc::BadFormat, "stages must be both, skin or clothes");
    }
  }

  std::ofstream out(out_prefix + ".result.json", std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write result json");
  out << result.dump(2) << "\n";
  std::cout << "segment: wrote " << out_prefix << ".*.png and " << out_prefix
            << ".result.json\n";
  return 0;
}

// ---- bench ------------------------------------------------------------------

int cmd_bench(const std::string& manifest_path, const std::string& approaches_csv,
              const std::string& out_dir, int jobs, const PipelineFlags& flags) {
  PipelineOptions opt = flags.resolve();
  opt.bench.jobs = jobs;

  json manifest = load_json_file(manifest_path);
  require(manifest.is_array() && !manifest.empty(), Errc::BadFormat,
          manifest_path + ": expected a non-empty array");
  fs::path base = fs::path(manifest_path).parent_path();
  auto resolve_path = [&](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  std::vector<BenchImage> corpus;
  for (const json& item : manifest) {
    BenchImage bi;
    bi.id = fs::path(item.at("image").get<std::string>()).stem().string();
    bi.image = read_image(resolve_path(item.at("image").get<std::string>()));
    bi.eyes = read_eyes(resolve_path(item.at("eyes").get<std::string>()));
    bi.people_gt = read_mask(resolve_path(item.at("gt").get<std::string>()));
    corpus.push_back(std::move(bi));
  }

  std::vector<Approach> approaches;
  std::stringstream ss(approaches_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name == "PixelGC_Geo") approaches.push_back(Approach::PixelGC_Geo);
    else if (name == "PixelGC_Prob") approaches.push_back(Approach::PixelGC_Prob);
    else if (name == "TriToMGC_Geo") approaches.push_back(Approach::TriToMGC_Geo);
    else if (name == "TriToMGC_Prob") approaches.push_back(Approach::TriToMGC_Prob);
    else fail(Errc::BadFormat, "unknown approach " + name);
  }

  fs::create_directories(out_dir);
  auto records = run_benchmark(corpus, approaches, opt.bench);
  emit_report(out_dir, records, opt.with_timings);

  auto norm = normalized_iterations(records);
  std::cout << "bench: " << records.size() << " runs over " << corpus.size() << " images\n";
  for (const auto& [n, v] : norm) std::cout << "  " << n << " normalized iterations " << v << "\n";
  std::cout << "reports in " << out_dir << "\n";
  return 0;
}

// ---- features ---------------------------------------------------------------

int cmd_features(const std::string& image_path, const std::string& mask_path,
                 const std::string& kind_name, const std::string& descriptor,
                 const std::string& bbox_csv, int grid, int cell, int bins,
                 const std::string& id_opt, const std::string& out_path) {
  RgbImage img = read_image(image_path);
  Mask mask;
  bool have_mask = !mask_path.empty();
  if (have_mask) mask = read_mask(mask_path);

  PatternKind kind = kind_name == "face"      ? PatternKind::Face
                     : kind_name == "clothes" ? PatternKind::Clothes
                                              : PatternKind::HeadShoulders;
  Bbox box;
  bool have_box = !bbox_csv.empty();
  if (have_box) {
    if (std::sscanf(bbox_csv.c_str(), "%d,%d,%d,%d", &box.x, &box.y, &box.width,
                    &box.height) != 4)
      fail(Errc::BadFormat, "--bbox expects x,y,w,h");
  }

  PatternInput pattern = prepare_pattern(img, have_mask ? &mask : nullptr, kind,
                                         have_box ? &box : nullptr);
  Descriptor d;
  if (descriptor == "lbp") d = lbp_descriptor(pattern, grid);
  else if (descriptor == "hog") d = hog_descriptor(pattern, cell, bins);
  else if (descriptor == "both")
    d = concat({lbp_descriptor(pattern, grid), hog_descriptor(pattern, cell, bins)});
  else fail(Errc::BadFormat, "descriptor must be lbp, hog or both");

  std::string id = id_opt.empty() ? fs::path(image_path).stem().string() : id_opt;
  write_descriptors_csv(out_path, {id}, {d});
  std::cout << "features: " << d.values.size() << " values -> " << out_path << "\n";
  return 0;
}

// ---- buildmap ---------------------------------------------------------------

int cmd_buildmap(const std::string& manifest_path, const std::string& target_name,
                 int canvas_w, int canvas_h, double mid_x, double mid_y, double d0,
                 const std::string& out_path) {
  json manifest = load_json_file(manifest_path);
  require(manifest.is_array() && !manifest.empty(), Errc::NoMasks,
          manifest_path + ": expected a non-empty array");
  fs::path base = fs::path(manifest_path).parent_path();
  auto resolve_path = [&](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  std::vector<Mask> masks;
  std::vector<EyePair> eyes;
  for (const json& item : manifest) {
    masks.push_back(read_mask(resolve_path(item.at("mask").get<std::string>())));
    eyes.push_back(read_eyes(resolve_path(item.at("eyes").get<std::string>())));
  }
  std::vector<std::pair<const Mask*, EyePair>> pairs;
  for (std::size_t i = 0; i < masks.size(); ++i) pairs.push_back({&masks[i], eyes[i]});

  CanonicalFrame frame;
  frame.canvas_width = canvas_w;
  frame.canvas_height = canvas_h;
  frame.eye_midpoint = {mid_x, mid_y};
  frame.inter_eye_distance = d0;
  MapTarget target = target_name == "clothes" ? MapTarget::Clothes : MapTarget::Skin;
  ProbabilityMap map = build_probability_map(pairs, frame, target);
  write_probability_map(out_path, map);
  std::cout << "buildmap: pooled " << masks.size() << " masks -> " << out_path << "\n";
  return 0;
}

// ---- cv ---------------------------------------------------------------------

std::map<std::string, std::vector<double>> read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), Errc::IoFailure, "cannot open " + path);
  std::map<std::string, std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, cellv;
    std::getline(ss, id, ',');
    std::vector<double> values;
    while (std::getline(ss, cellv, ',')) values.push_back(std::stod(cellv));
    require(!id.empty() && !values.empty(), Errc::BadFormat, path + ": malformed row");
    rows[id] = std::move(values);
  }
  require(!rows.empty(), Errc::BadFormat, path + ": no rows");
  return rows;
}

int cmd_cv(const std::vector<std::string>& feature_csvs,
           const std::vector<std::string>& score_csvs, const std::string& labels_path,
           const std::string& weights_csv, double C, double gamma, int folds, int reps,
           std::uint64_t seed, const std::string& out_path) {
  // labels: CSV id,label with label in {M,F,male,female,+1,-1}
  std::ifstream in(labels_path);
  require(bool(in), Errc::IoFailure, "cannot open " + labels_path);
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, lab;
    std::getline(ss, id, ',');
    std::getline(ss, lab, ',');
    int y = 0;
    if (lab == "M" || lab == "male" || lab == "+1" || lab == "1") y = kMale;
    else if (lab == "F" || lab == "female" || lab == "-1") y = kFemale;
    else fail(Errc::BadFormat, labels_path + ": unknown label " + lab);
    ids.push_back(id);
    labels.push_back(y);
  }

  LabeledSet set;
  set.ids = ids;
  set.labels = labels;
  for (const std::string& path : feature_csvs) {
    auto rows = read_feature_csv(path);
    Cue cue;
    cue.name = fs::path(path).stem().string();
    for (const std::string& id : ids) {
      auto it = rows.find(id);
      require(it != rows.end(), Errc::LengthMismatch, path + ": missing sample " + id);
      cue.features.push_back(it->second);
    }
    set.cues.push_back(std::move(cue));
  }
  for (const std::string& path : score_csvs) {
    auto rows = read_feature_csv(path);
    Cue cue;
    cue.name = fs::path(path).stem().string();
    for (const std::string& id : ids) {
      auto it = rows.find(id);
      require(it != rows.end() && it->second.size() == 1, Errc::LengthMismatch,
              path + ": score rows need exactly one value per sample");
      cue.external_scores.push_back(it->second[0]);
    }
    set.cues.push_back(std::move(cue));
  }

  FusionRule rule;
  if (weights_csv.empty()) {
    rule = FusionRule::equal(set.cues.size());
  } else {
    std::stringstream ss(weights_csv);
    std::string w;
    while (std::getline(ss, w, ',')) rule.weights.push_back(std::stod(w));
  }

  CvConfig cfg;
  cfg.folds = folds;
  cfg.repetitions = reps;
  cfg.seed = seed;
  cfg.svm.C = C;
  cfg.svm.gamma = gamma;
  CvReport report = cross_validate(set, rule, cfg);

  std::ofstream out(out_path, std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write " + out_path);
  out << report.to_json().dump(2) << "\n";
  std::cout << "cv: fused accuracy " << report.fused.mean << " +/- " << report.fused.stddev
            << " -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triangular-superpixel people segmentation and descriptors"};
  app.require_subcommand(1);

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "build the trixel mesh of an image");
  std::string mesh_image, mesh_out, mesh_overlay;
  DmumParams dmum;
  mesh_cmd->add_option("image", mesh_image, "input image (PNG/PPM/PGM)")->required();
  mesh_cmd->add_option("--out", mesh_out, "mesh dump path (default <image>.tritom)");
  mesh_cmd->add_option("--overlay", mesh_overlay, "edge overlay PNG path");
  mesh_cmd->add_option("--seed-scale", dmum.seed_scale, "distance cost of flat pixels")
      ->capture_default_str();
  mesh_cmd->add_option("--min-spacing", dmum.min_spacing, "vertex suppression radius, px")
      ->capture_default_str();
  mesh_cmd->add_option("--border-step", dmum.border_step, "border vertex spacing, px")
      ->capture_default_str();

  // segment
  auto* seg_cmd = app.add_subcommand("segment", "two-stage skin + clothes segmentation");
  std::string seg_image, seg_eyes, seg_prefix, seg_engine = "tritom", seg_trimap = "geo";
  std::string seg_stages = "both", seg_skin_mask;
  PipelineFlags seg_flags;
  seg_cmd->add_option("image", seg_image, "input image")->required();
  seg_cmd->add_option("--eyes", seg_eyes, "eye sidecar JSON (default <image>.eyes.json)");
  seg_cmd->add_option("--out-prefix", seg_prefix, "output prefix (default image basename)");
  seg_cmd->add_option("--engine", seg_engine, "pixel | tritom")->capture_default_str();
  seg_cmd->add_option("--trimap", seg_trimap, "geo | prob")->capture_default_str();
  seg_cmd->add_option("--stages", seg_stages, "both | skin | clothes")->capture_default_str();
  seg_cmd->add_option("--skin-mask", seg_skin_mask, "prior skin mask for --stages clothes");
  seg_flags.add_to(seg_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "speed/quality benchmark over a corpus");
  std::string bench_manifest, bench_out = "bench_out";
  std::string bench_approaches = "PixelGC_Geo,PixelGC_Prob,TriToMGC_Geo,TriToMGC_Prob";
  int bench_jobs = 1;
  PipelineFlags bench_flags;
  bench_cmd->add_option("--manifest", bench_manifest,
                        "JSON list of {\"image\",\"eyes\",\"gt\"}")
      ->required();
  bench_cmd->add_option("--approaches", bench_approaches, "comma-separated approach ids")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "report directory")->capture_default_str();
  bench_cmd->add_option("--jobs", bench_jobs, "parallel image workers")->capture_default_str();
  bench_flags.add_to(bench_cmd);

  // features
  auto* feat_cmd = app.add_subcommand("features", "LBP/HOG descriptors of one pattern");
  std::string feat_image, feat_mask, feat_kind = "hs", feat_descriptor = "lbp";
  std::string feat_bbox, feat_id, feat_out = "features.csv";
  int feat_grid = 5, feat_cell = 8, feat_bins = 9;
  feat_cmd->add_option("image", feat_image, "input image")->required();
  feat_cmd->add_option("--mask", feat_mask, "binary mask PNG (required for clothes)");
  feat_cmd->add_option("--kind", feat_kind, "face | hs | clothes")->capture_default_str();
  feat_cmd->add_option("--descriptor", feat_descriptor, "lbp | hog | both")
      ->capture_default_str();
  feat_cmd->add_option("--bbox", feat_bbox, "crop box x,y,w,h");
  feat_cmd->add_option("--grid", feat_grid, "LBP cells per side")->capture_default_str();
  feat_cmd->add_option("--cell", feat_cell, "HOG cell size, px")->capture_default_str();
  feat_cmd->add_option("--bins", feat_bins, "HOG orientation bins")->capture_default_str();
  feat_cmd->add_option("--id", feat_id, "sample id (default image basename)");
  feat_cmd->add_option("--out", feat_out, "output CSV")->capture_default_str();

  // buildmap
  auto* map_cmd = app.add_subcommand("buildmap", "pool masks into a probability map");
  std::string map_manifest, map_target = "skin", map_out = "probmap.png";
  int map_w = 256, map_h = 320;
  double map_mx = 128.0, map_my = 80.0, map_d0 = 40.0;
  map_cmd->add_option("--masks", map_manifest, "JSON list of {\"mask\",\"eyes\"}")->required();
  map_cmd->add_option("--target", map_target, "skin | clothes")->capture_default_str();
  map_cmd->add_option("--canvas-width", map_w, "canonical canvas width")->capture_default_str();
  map_cmd->add_option("--canvas-height", map_h, "canonical canvas height")
      ->capture_default_str();
  map_cmd->add_option("--midpoint-x", map_mx, "eye midpoint x")->capture_default_str();
  map_cmd->add_option("--midpoint-y", map_my, "eye midpoint y")->capture_default_str();
  map_cmd->add_option("--d0", map_d0, "canonical inter-eye distance")->capture_default_str();
  map_cmd->add_option("--out", map_out, "output 16-bit PNG (sidecar JSON next to it)")
      ->capture_default_str();

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "repeated stratified cross-validation with fusion");
  std::vector<std::string> cv_features, cv_scores;
  std::string cv_labels, cv_weights, cv_out = "cv_report.json";
  double cv_C = 1.0, cv_gamma = -1.0;
  int cv_folds = 5, cv_reps = 5;
  std::uint64_t cv_seed = 42;
  cv_cmd->add_option("--features", cv_features, "feature CSVs, one per trainable cue")
      ->expected(-1);
  cv_cmd->add_option("--scores", cv_scores, "score CSVs, one per external cue")->expected(-1);
  cv_cmd->add_option("--labels", cv_labels, "CSV id,label (M/F)")->required();
  cv_cmd->add_option("--weights", cv_weights, "fusion weights, comma-separated");
  cv_cmd->add_option("--svm-c", cv_C, "SVM regularization")->capture_default_str();
  cv_cmd->add_option("--svm-gamma", cv_gamma, "RBF width (<=0: 1/dim)")->capture_default_str();
  cv_cmd->add_option("--folds", cv_folds, "folds")->capture_default_str();
  cv_cmd->add_option("--repetitions", cv_reps, "repetitions")->capture_default_str();
  cv_cmd->add_option("--seed", cv_seed, "shuffle seed")->capture_default_str();
  cv_cmd->add_option("--out", cv_out, "report JSON path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) {
      if (mesh_out.empty()) mesh_out = strip_extension(mesh_image) + ".tritom";
      return cmd_mesh(mesh_image, mesh_out, mesh_overlay, dmum);
    }
    if (seg_cmd->parsed())
      return cmd_segment(seg_image, seg_eyes, seg_prefix, seg_engine, seg_trimap, seg_stages,
                         seg_skin_mask, seg_flags);
    if (bench_cmd->parsed())
      return cmd_bench(bench_manifest, bench_approaches, bench_out, bench_jobs, bench_flags);
    if (feat_cmd->parsed())
      return cmd_features(feat_image, feat_mask, feat_kind, feat_descriptor, feat_bbox,
                          feat_grid, feat_cell, feat_bins, feat_id, feat_out);
    if (map_cmd->parsed())
      return cmd_buildmap(map_manifest, map_target, map_w, map_h, map_mx, map_my, map_d0,
                          map_out);
    if (cv_cmd->parsed())
      return cmd_cv(cv_features, cv_scores, cv_labels, cv_weights, cv_C, cv_gamma, cv_folds,
                    cv_reps, cv_seed, cv_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
