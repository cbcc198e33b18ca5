#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "trixel/error.hpp"
#include "trixel/grabcut.hpp"
#include "trixel/image.hpp"
#include "trixel/trimap.hpp"

namespace trixel {

/// Intersection over union; two empty masks agree perfectly.
inline double jaccard(const Mask& seg, const Mask& gt) {
  require(seg.width == gt.width && seg.height == gt.height, Errc::DimMismatch,
          "mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < seg.values.size(); ++i) {
    bool a = seg.values[i] != 0, b = gt.values[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

enum class Approach { PixelGC_Geo, PixelGC_Prob, TriToMGC_Geo, TriToMGC_Prob };

inline const char* approach_name(Approach a) {
  switch (a) {
    case Approach::PixelGC_Geo: return "PixelGC_Geo";
    case Approach::PixelGC_Prob: return "PixelGC_Prob";
    case Approach::TriToMGC_Geo: return "TriToMGC_Geo";
    case Approach::TriToMGC_Prob: return "TriToMGC_Prob";
  }
  return "?";
}

inline bool approach_uses_trixels(Approach a) {
  return a == Approach::TriToMGC_Geo || a == Approach::TriToMGC_Prob;
}

inline bool approach_uses_prob(Approach a) {
  return a == Approach::PixelGC_Prob || a == Approach::TriToMGC_Prob;
}

/// One corpus entry, already loaded.
struct BenchImage {
  std::string id;
  RgbImage image;
  EyePair eyes;
  Mask people_gt;  // skin + clothes union ground truth
};

struct BenchConfig {
  // per-engine configurations: the pixel baseline runs the classical
  // defaults; the trixel engine treats trixels as unweighted atoms and, when
  // trixel_floor_auto is set, widens the covariance floor to the measured
  // within-trixel color variance (a trixel mean is only known to that
  // precision)
  GrabCutConfig pixel_grabcut;
  GrabCutConfig trixel_grabcut = [] {
    GrabCutConfig c;
    c.area_weighting = false;
    return c;
  }();
  bool trixel_floor_auto = true;
  DmumParams dmum;
  GeometricTemplate geo_template;
  ProbTrimapParams prob_params;
  const ProbabilityMap* skin_map = nullptr;     // required for *_Prob approaches
  const ProbabilityMap* clothes_map = nullptr;
  int jobs = 1;

  GrabCutConfig grabcut_for(Approach a, const TrixelMesh* mesh,
                            const RgbImage& img) const {
    if (!approach_uses_trixels(a)) return pixel_grabcut;
    GrabCutConfig c = trixel_grabcut;
    if (trixel_floor_auto && mesh)
      c.variance_floor = std::max(c.variance_floor, mean_member_variance(*mesh, img));
    return c;
  }
};

struct BenchRecord {
  std::string approach;
  std::string image_id;
  bool ok = false;
  std::string error;
  int iterations = 0;  // skin + clothes stages
  int unit_count = 0;
  double ji = 0.0;
  StageTimings timings;
  std::vector<double> skin_energy;
  std::vector<double> clothes_energy;
};

struct JaccardReport {
  std::string approach;
  std::vector<double> per_image;
  std::array<double, 21> curve{};  // fraction of images with JI >= t, t = 0.00..1.00

  void finalize() {
    for (int k = 0; k <= 20; ++k) {
      double t = k * 0.05;
      std::size_t n = 0;
      for (double ji : per_image) n += (ji >= t - 1e-12);
      curve[k] = per_image.empty() ? 0.0 : double(n) / double(per_image.size());
    }
  }
};

/// Both stages of one approach on one image: skin first, then clothes seeded
/// against the segmented skin; the people mask is their union.
struct TwoStageOutput {
  Mask skin;
  Mask clothes;
  Mask people;
  SegmentationResult skin_result;
  SegmentationResult clothes_result;
};

inline TwoStageOutput run_two_stage(const RgbImage& img, const EyePair& eyes, Approach approach,
                                    const BenchConfig& cfg, const TrixelMesh* mesh) {
  UnitMode mode = approach_uses_trixels(approach) ? UnitMode::Trixel : UnitMode::Pixel;
  if (mode == UnitMode::Trixel)
    require(mesh != nullptr, Errc::MeshMismatch, "trixel approach needs a mesh");
  if (approach_uses_prob(approach))
    require(cfg.skin_map != nullptr && cfg.clothes_map != nullptr, Errc::NoMasks,
            "probabilistic approaches need skin and clothes maps");

  const TrixelMesh* units = mode == UnitMode::Trixel ? mesh : nullptr;
  GrabCutConfig gc = cfg.grabcut_for(approach, units, img);

  TwoStageOutput out;
  Trimap skin_tm =
      approach_uses_prob(approach)
          ? probabilistic_trimap(img.width, img.height, eyes, *cfg.skin_map, cfg.prob_params,
                                 Stage::Skin, nullptr, units)
          : geometric_trimap(img.width, img.height, eyes, cfg.geo_template, Stage::Skin,
                             nullptr, units);
  out.skin_result = segment(img, skin_tm, mode, gc, units);
  out.skin = out.skin_result.mask;

  Trimap clothes_tm =
      approach_uses_prob(approach)
          ? probabilistic_trimap(img.width, img.height, eyes, *cfg.clothes_map,
                                 cfg.prob_params, Stage::Clothes, &out.skin, units)
          : geometric_trimap(img.width, img.height, eyes, cfg.geo_template, Stage::Clothes,
                             &out.skin, units);
  out.clothes_result = segment(img, clothes_tm, mode, gc, units);
  out.clothes = out.clothes_result.mask;

  out.people = Mask(img.width, img.height);
  for (std::size_t i = 0; i < out.people.values.size(); ++i)
    out.people.values[i] = (out.skin.values[i] || out.clothes.values[i]) ? 255 : 0;
  return out;
}

/// The full speed/quality comparison: every approach on every image. Images
/// run in parallel across `jobs` workers; records land in corpus order, so
/// output is independent of scheduling. Per-image failures are recorded, not
/// fatal.
inline std::vector<BenchRecord> run_benchmark(const std::vector<BenchImage>& corpus,
                                              const std::vector<Approach>& approaches,
                                              const BenchConfig& cfg) {
  require(!corpus.empty(), Errc::NoRecords, "empty corpus");
  std::vector<BenchRecord> records(corpus.size() * approaches.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < corpus.size(); i = next.fetch_add(1)) {
      const BenchImage& item = corpus[i];

      TrixelMesh mesh;
      double mesh_ms = 0.0;
      bool mesh_ok = false;
      bool need_mesh = false;
      for (Approach a : approaches) need_mesh |= approach_uses_trixels(a);
      std::string mesh_error;
      if (need_mesh) {
        auto t0 = std::chrono::steady_clock::now();
        try {
          ScalarField gray = to_grayscale(item.image);
          ScalarField d = compute_dmum(gray, cfg.dmum);
          mesh = triangulate(extract_vertices(d, cfg.dmum), item.image.width,
                             item.image.height);
          rasterize_and_summarize(mesh, item.image);
          mesh_ok = true;
        } catch (const Error& e) {
          mesh_error = e.what();
        }
        mesh_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            t0)
                      .count();
      }

      for (std::size_t ai = 0; ai < approaches.size(); ++ai) {
        Approach approach = approaches[ai];
        BenchRecord& rec = records[i * approaches.size() + ai];
        rec.approach = approach_name(approach);
        rec.image_id = item.id;
        try {
          if (approach_uses_trixels(approach) && !mesh_ok)
            fail(Errc::MeshMismatch, "mesh construction failed: " + mesh_error);
          TwoStageOutput out =
              run_two_stage(item.image, item.eyes, approach, cfg,
                            approach_uses_trixels(approach) ? &mesh : nullptr);
          rec.ok = true;
          rec.iterations = out.skin_result.iterations + out.clothes_result.iterations;
          rec.unit_count = out.skin_result.unit_count;
          rec.ji = jaccard(out.people, item.people_gt);
          rec.timings.mesh_ms = approach_uses_trixels(approach) ? mesh_ms : 0.0;
          rec.timings.gmm_ms =
              out.skin_result.timings.gmm_ms + out.clothes_result.timings.gmm_ms;
          rec.timings.flow_ms =
              out.skin_result.timings.flow_ms + out.clothes_result.timings.flow_ms;
          rec.skin_energy = out.skin_result.energy_trace;
          rec.clothes_energy = out.clothes_result.energy_trace;
        } catch (const Error& e) {
          rec.ok = false;
          rec.error = e.what();
        }
      }
    }
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

inline JaccardReport jaccard_report(const std::vector<BenchRecord>& records,
                                    const std::string& approach) {
  JaccardReport rep;
  rep.approach = approach;
  for (const BenchRecord& r : records)
    if (r.ok && r.approach == approach) rep.per_image.push_back(r.ji);
  rep.finalize();
  return rep;
}

/// Mean iterations per approach divided by the PixelGC_Geo mean (the
/// classical baseline normalizes to 1.0).
inline std::map<std::string, double> normalized_iterations(
    const std::vector<BenchRecord>& records) {
  std::map<std::string, std::pair<double, int>> sums;
  for (const BenchRecord& r : records)
    if (r.ok) {
      sums[r.approach].first += r.iterations;
      sums[r.approach].second += 1;
    }
  std::map<std::string, double> means;
  for (const auto& [name, s] : sums) means[name] = s.first / double(s.second);
  std::map<std::string, double> out;
  auto base = means.find("PixelGC_Geo");
  if (base == means.end() || base->second <= 0.0) return out;
  for (const auto& [name, m] : means) out[name] = m / base->second;
  return out;
}

/// bench.json + per-approach curve files (CSV and gnuplot-style .dat) +
/// table1.csv with normalized iteration counts.
inline void emit_report(const std::string& dir, const std::vector<BenchRecord>& records,
                        bool with_timings = true) {
  require(!records.empty(), Errc::NoRecords, "no benchmark records");

  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  std::vector<std::string> approaches;
  for (const BenchRecord& r : records) {
    nlohmann::json rec;
    rec["approach"] = r.approach;
    rec["image"] = r.image_id;
    rec["ok"] = r.ok;
    if (!r.ok) {
      rec["error"] = r.error;
    } else {
      rec["iterations"] = r.iterations;
      rec["unit_count"] = r.unit_count;
      rec["ji"] = r.ji;
      rec["energy"] = {{"skin", r.skin_energy}, {"clothes", r.clothes_energy}};
      if (with_timings)
        rec["timings_ms"] = {{"mesh", r.timings.mesh_ms},
                             {"gmm", r.timings.gmm_ms},
                             {"flow", r.timings.flow_ms}};
    }
    j["records"].push_back(rec);
    if (std::find(approaches.begin(), approaches.end(), r.approach) == approaches.end())
      approaches.push_back(r.approach);
  }
  auto norm = normalized_iterations(records);
  for (const auto& [name, v] : norm) j["normalized_iterations"][name] = v;

  std::ofstream out(dir + "/bench.json", std::ios::trunc);
  require(bool(out), Errc::IoFailure, "cannot write bench.json");
  out << j.dump(2) << "\n";

  for (const std::string& name : approaches) {
    JaccardReport rep = jaccard_report(records, name);
    std::ofstream csv(dir + "/curve_" + name + ".csv", std::ios::trunc);
    require(bool(csv), Errc::IoFailure, "cannot write curve csv");
    std::ofstream dat(dir + "/curve_" + name + ".dat", std::ios::trunc);
    require(bool(dat), Errc::IoFailure, "cannot write curve dat");
    dat << "# jaccard_threshold fraction_of_images\n";
    csv.precision(6);
    dat.precision(6);
    for (int k = 0; k <= 20; ++k) {
      double t = k * 0.05;
      csv << std::fixed << t << "," << rep.curve[k] << "\n";
      dat << std::fixed << t << " " << rep.curve[k] << "\n";
    }
  }

  std::ofstream table(dir + "/table1.csv", std::ios::trunc);
  require(bool(table), Errc::IoFailure, "cannot write table1.csv");
  table.precision(3);
  bool first = true;
  for (const auto& [name, v] : norm) {
    table << (first ? "" : ",") << name;
    first = false;
  }
  table << "\n";
  first = true;
  for (const auto& [name, v] : norm) {
    table << (first ? "" : ",") << std::fixed << v;
    first = false;
  }
  table << "\n";
}

}  // namespace trixel
