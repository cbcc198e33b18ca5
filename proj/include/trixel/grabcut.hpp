#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trixel/error.hpp"
#include "trixel/gmm.hpp"
#include "trixel/image.hpp"
#include "trixel/maxflow.hpp"
#include "trixel/mesh.hpp"
#include "trixel/trimap.hpp"
#include "trixel/unit_graph.hpp"

namespace trixel {

struct GrabCutConfig {
  int components = 5;             // K per class
  double gamma = 50.0;            // neighbor-link scale
  int max_iters = 10;
  double convergence_tol = 1e-3;  // relative energy change
  double variance_floor = 0.01;   // added to covariance diagonals
  bool area_weighting = true;     // weight trixel terms by pixel count
  bool beta_squared_distance = true;  // squared vs plain color distance in beta
  std::uint64_t seed = 42;

  void validate() const {
    require(components >= 1 && max_iters >= 1 && convergence_tol > 0.0 &&
                variance_floor > 0.0 && gamma > 0.0,
            Errc::BadFormat, "invalid GrabCut configuration");
  }
};

struct StageTimings {
  double mesh_ms = 0.0;
  double gmm_ms = 0.0;
  double flow_ms = 0.0;
};

struct SegmentationResult {
  Mask mask;
  int iterations = 0;
  std::vector<double> energy_trace;
  StageTimings timings;
  int unit_count = 0;
};

using UnitLabels = std::vector<std::uint8_t>;  // 1 = foreground

/// Initial hard labeling: everything not known background starts foreground.
inline UnitLabels init_segmentation(const Trimap& trimap) {
  UnitLabels labels(trimap.labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = trimap.labels[i] == TrimapLabel::Background ? 0 : 1;
  return labels;
}

namespace detail {

inline void split_by_label(const UnitGraph& g, const UnitLabels& labels, bool area_weighting,
                           std::vector<Color>* fg_colors, std::vector<double>* fg_w,
                           std::vector<int>* fg_idx, std::vector<Color>* bg_colors,
                           std::vector<double>* bg_w, std::vector<int>* bg_idx) {
  for (int u = 0; u < g.unit_count(); ++u) {
    double w = area_weighting ? g.areas[u] : 1.0;
    if (labels[u]) {
      fg_colors->push_back(g.colors[u]);
      fg_w->push_back(w);
      fg_idx->push_back(u);
    } else {
      bg_colors->push_back(g.colors[u]);
      bg_w->push_back(w);
      bg_idx->push_back(u);
    }
  }
  require(!fg_colors->empty(), Errc::EmptyClass, "no foreground units");
  require(!bg_colors->empty(), Errc::EmptyClass, "no background units");
}

}  // namespace detail

/// Fresh mixtures via weighted k-means++ clustering of each class.
inline GmmPair fit_gmms(const UnitGraph& g, const UnitLabels& labels,
                        const GrabCutConfig& cfg) {
  cfg.validate();
  std::vector<Color> fg_c, bg_c;
  std::vector<double> fg_w, bg_w;
  std::vector<int> fg_i, bg_i;
  detail::split_by_label(g, labels, cfg.area_weighting, &fg_c, &fg_w, &fg_i, &bg_c, &bg_w,
                         &bg_i);
  GmmPair out;
  Rng fg_rng(cfg.seed);
  Rng bg_rng(cfg.seed + 0x9e3779b97f4a7c15ULL);
  auto fg_assign = detail::weighted_kmeans(fg_c, fg_w, cfg.components, fg_rng);
  auto bg_assign = detail::weighted_kmeans(bg_c, bg_w, cfg.components, bg_rng);
  out.fg = detail::components_from_assignment(fg_c, fg_w, fg_assign, cfg.components,
                                              cfg.variance_floor);
  out.bg = detail::components_from_assignment(bg_c, bg_w, bg_assign, cfg.components,
                                              cfg.variance_floor);
  return out;
}

/// Most likely component of each unit within its current class.
inline std::vector<int> assign_components(const UnitGraph& g, const UnitLabels& labels,
                                          const GmmPair& gmms) {
  std::vector<int> comp(g.unit_count());
  for (int u = 0; u < g.unit_count(); ++u) {
    const Gmm& mix = labels[u] ? gmms.fg : gmms.bg;
    comp[u] = mix.most_likely_component(g.colors[u]);
  }
  return comp;
}

/// Update component statistics from the current hard assignments.
inline GmmPair learn_gmms(const UnitGraph& g, const UnitLabels& labels,
                          const std::vector<int>& comp, const GrabCutConfig& cfg) {
  std::vector<Color> fg_c, bg_c;
  std::vector<double> fg_w, bg_w;
  std::vector<int> fg_a, bg_a;
  for (int u = 0; u < g.unit_count(); ++u) {
    double w = cfg.area_weighting ? g.areas[u] : 1.0;
    if (labels[u]) {
      fg_c.push_back(g.colors[u]);
      fg_w.push_back(w);
      fg_a.push_back(comp[u]);
    } else {
      bg_c.push_back(g.colors[u]);
      bg_w.push_back(w);
      bg_a.push_back(comp[u]);
    }
  }
  require(!fg_c.empty() && !bg_c.empty(), Errc::EmptyClass, "a class lost all its units");
  GmmPair out;
  out.fg = detail::components_from_assignment(fg_c, fg_w, fg_a, cfg.components,
                                              cfg.variance_floor);
  out.bg = detail::components_from_assignment(bg_c, bg_w, bg_a, cfg.components,
                                              cfg.variance_floor);
  return out;
}

constexpr double kDensityFloor = 1e-30;

/// Terminal capacities. Unknown units pay the mixture negative log-likelihood
/// of the opposite class (scaled by unit area); trimap-constrained units get
/// an unseverable link. A per-unit constant shift keeps capacities
/// non-negative when a density exceeds 1; the minimizer is unchanged.
inline std::vector<std::pair<double, double>> t_links(const UnitGraph& g, const Trimap& trimap,
                                                      const GmmPair& gmms,
                                                      const GrabCutConfig& cfg, double big) {
  std::vector<std::pair<double, double>> caps(g.unit_count());
  for (int u = 0; u < g.unit_count(); ++u) {
    switch (trimap.labels[u]) {
      case TrimapLabel::Foreground:
        caps[u] = {big, 0.0};
        break;
      case TrimapLabel::Background:
        caps[u] = {0.0, big};
        break;
      case TrimapLabel::Unknown: {
        double a = cfg.area_weighting ? g.areas[u] : 1.0;
        double src = a * -std::log(std::max(gmms.bg.density(g.colors[u]), kDensityFloor));
        double snk = a * -std::log(std::max(gmms.fg.density(g.colors[u]), kDensityFloor));
        double m = std::min(src, snk);
        if (m < 0.0) {
          src -= m;
          snk -= m;
        }
        caps[u] = {src, snk};
        break;
      }
    }
  }
  return caps;
}

/// Run the minimum cut for fixed mixtures; labels foreground = source side.
inline std::pair<UnitLabels, double> max_flow(const UnitGraph& g,
                                              const std::vector<std::pair<double, double>>& tcaps,
                                              const std::vector<double>& nlinks) {
  BkMaxflow mf(g.unit_count());
  for (int u = 0; u < g.unit_count(); ++u) mf.add_tweights(u, tcaps[u].first, tcaps[u].second);
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    mf.add_edge(g.edges[e].first, g.edges[e].second, nlinks[e], nlinks[e]);
  double flow = mf.solve();
  UnitLabels labels(g.unit_count());
  for (int u = 0; u < g.unit_count(); ++u) labels[u] = mf.in_source_side(u) ? 1 : 0;
  return {std::move(labels), flow};
}

/// Total segmentation energy: area-weighted mixture negative log-likelihood
/// of each unit under its label, plus every severed neighbor link.
inline double segmentation_energy(const UnitGraph& g, const UnitLabels& labels,
                                  const GmmPair& gmms, const std::vector<double>& nlinks,
                                  const GrabCutConfig& cfg) {
  double e = 0.0;
  for (int u = 0; u < g.unit_count(); ++u) {
    double a = cfg.area_weighting ? g.areas[u] : 1.0;
    const Gmm& mix = labels[u] ? gmms.fg : gmms.bg;
    e += a * -std::log(std::max(mix.density(g.colors[u]), kDensityFloor));
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (labels[g.edges[i].first] != labels[g.edges[i].second]) e += nlinks[i];
  return e;
}

namespace detail {

inline Mask paint_mask(const UnitGraph& g, const UnitLabels& labels, const TrixelMesh* mesh) {
  Mask mask(g.width, g.height);
  if (g.mode == UnitMode::Pixel) {
    for (std::size_t i = 0; i < labels.size(); ++i) mask.values[i] = labels[i] ? 255 : 0;
    return mask;
  }
  for (const Trixel& t : mesh->trixels) {
    if (!labels[t.id]) continue;
    for (std::int32_t pi : t.pixel_members) mask.values[pi] = 255;
  }
  return mask;
}

inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace detail

/// Iterative segmentation: component assignment, mixture update, terminal
/// links, minimum cut, until the labeling stops changing, the energy
/// improvement falls below the tolerance, or the iteration cap is reached.
/// An iteration that worsens the energy is rejected (the previous labeling is
/// final), so the recorded trace never increases.
inline SegmentationResult segment(const RgbImage& img, const Trimap& trimap, UnitMode mode,
                                  const GrabCutConfig& cfg, const TrixelMesh* mesh = nullptr) {
  cfg.validate();
  trimap.validate();

  SegmentationResult result;
  TrixelMesh local_mesh;
  if (mode == UnitMode::Trixel && mesh == nullptr) {
    auto t0 = std::chrono::steady_clock::now();
    local_mesh = build_mesh(img);
    result.timings.mesh_ms = detail::ms_since(t0);
    mesh = &local_mesh;
  }

  UnitGraph g = build_unit_graph(img, mode, mesh);
  require(trimap.labels.size() == std::size_t(g.unit_count()), Errc::DimMismatch,
          "trimap unit count does not match graph");
  result.unit_count = g.unit_count();

  double beta = compute_beta(g, cfg.beta_squared_distance);
  std::vector<double> nlinks = all_n_links(g, beta, cfg.gamma);

  // unseverable terminal capacity: more than any unit's combined neighbor links
  std::vector<double> incident(g.unit_count(), 0.0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    incident[g.edges[e].first] += nlinks[e];
    incident[g.edges[e].second] += nlinks[e];
  }
  double big = 1.0;
  for (double v : incident) big = std::max(big, 1.0 + v);

  UnitLabels labels = init_segmentation(trimap);

  auto t_gmm = std::chrono::steady_clock::now();
  GmmPair gmms = fit_gmms(g, labels, cfg);
  result.timings.gmm_ms += detail::ms_since(t_gmm);

  double prev_energy = std::numeric_limits<double>::max();
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    t_gmm = std::chrono::steady_clock::now();
    std::vector<int> comp = assign_components(g, labels, gmms);
    GmmPair updated = learn_gmms(g, labels, comp, cfg);
    result.timings.gmm_ms += detail::ms_since(t_gmm);

    auto caps = t_links(g, trimap, updated, cfg, big);

    auto t_flow = std::chrono::steady_clock::now();
    auto [new_labels, flow] = max_flow(g, caps, nlinks);
    result.timings.flow_ms += detail::ms_since(t_flow);

    double energy = segmentation_energy(g, new_labels, updated, nlinks, cfg);
    if (iter > 1 && energy > prev_energy) break;  // reject the worsening step

    gmms = updated;
    result.energy_trace.push_back(energy);
    result.iterations = iter;

    bool fixpoint = new_labels == labels;
    labels = std::move(new_labels);
    if (fixpoint) break;
    if (iter > 1) {
      double rel = std::abs(prev_energy - energy) / std::max(std::abs(prev_energy), 1e-12);
      if (rel < cfg.convergence_tol) break;
    }
    prev_energy = energy;
  }

  result.mask = detail::paint_mask(g, labels, mesh);
  return result;
}

inline nlohmann::json result_to_json(const SegmentationResult& r, bool with_timings = true) {
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["energy"] = r.energy_trace;
  j["unit_count"] = r.unit_count;
  if (with_timings)
    j["timings_ms"] = {{"mesh", r.timings.mesh_ms},
                       {"gmm", r.timings.gmm_ms},
                       {"flow", r.timings.flow_ms}};
  return j;
}

}  // namespace trixel
