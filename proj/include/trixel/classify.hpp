#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trixel/error.hpp"
#include "trixel/rng.hpp"
#include "trixel/svm.hpp"

namespace trixel {

// label convention: +1 = Male, -1 = Female; ties resolve to Female
constexpr int kMale = 1;
constexpr int kFemale = -1;

/// One classification cue: either trainable descriptor rows or externally
/// supplied per-sample scores (e.g. a pre-trained network's outputs read from
/// a CSV).
struct Cue {
  std::string name;
  std::vector<std::vector<double>> features;  // n rows when trainable
  std::vector<double> external_scores;        // n values when external

  bool external() const { return features.empty(); }
  std::size_t samples() const {
    return external() ? external_scores.size() : features.size();
  }
};

struct LabeledSet {
  std::vector<std::string> ids;
  std::vector<int> labels;  // +1 / -1
  std::vector<Cue> cues;

  std::size_t size() const { return labels.size(); }

  void validate() const {
    require(!cues.empty(), Errc::TooFewSamples, "need at least one cue");
    for (const Cue& c : cues)
      require(c.samples() == size(), Errc::LengthMismatch,
              "cue " + c.name + " sample count differs");
    require(ids.size() == size(), Errc::LengthMismatch, "ids do not match labels");
  }
};

/// Per-cue fusion weights (non-negative, summing to 1).
struct FusionRule {
  std::vector<double> weights;

  static FusionRule equal(std::size_t cues) {
    FusionRule r;
    r.weights.assign(cues, 1.0 / double(cues));
    return r;
  }

  void validate(std::size_t cues) const {
    require(weights.size() == cues, Errc::LengthMismatch, "weight count != cue count");
    double sum = 0.0;
    for (double w : weights) {
      require(w >= 0.0, Errc::BadFormat, "fusion weights must be non-negative");
      sum += w;
    }
    require(std::abs(sum - 1.0) < 1e-9, Errc::BadFormat, "fusion weights must sum to 1");
  }
};

/// Weighted sum of tanh-calibrated margins; tanh squashes heterogeneous
/// score scales into [-1, 1] before mixing. Returns (label, fused score).
inline std::pair<int, double> fuse(const std::vector<double>& scores, const FusionRule& rule) {
  rule.validate(scores.size());
  double fused = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    fused += rule.weights[i] * std::tanh(scores[i]);
  return {fused > 0.0 ? kMale : kFemale, fused};
}

struct CvConfig {
  int folds = 5;
  int repetitions = 5;
  std::uint64_t seed = 42;
  SvmParams svm;
};

struct CvStats {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
};

struct CvReport {
  std::vector<CvStats> per_cue;
  CvStats fused;
  int folds = 0;
  int repetitions = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["folds"] = folds;
    j["repetitions"] = repetitions;
    j["seed"] = seed;
    j["cues"] = nlohmann::json::array();
    for (const CvStats& s : per_cue)
      j["cues"].push_back({{"name", s.name}, {"mean", s.mean}, {"std", s.stddev}});
    j["fused"] = {{"mean", fused.mean}, {"std", fused.stddev}};
    return j;
  }
};

namespace detail {

/// Stratified fold assignment: shuffle each class, deal round-robin. Class
/// ratios per fold are preserved within one sample.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, Rng& rng) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] > 0 ? pos : neg).push_back(i);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<int> fold(labels.size(), 0);
  int f = 0;
  for (std::size_t i : pos) fold[i] = f++ % folds;
  f = 0;
  for (std::size_t i : neg) fold[i] = f++ % folds;
  return fold;
}

inline CvStats stats_of(const std::string& name, const std::vector<double>& xs) {
  CvStats s;
  s.name = name;
  double sum = std::accumulate(xs.begin(), xs.end(), 0.0);
  s.mean = sum / double(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = xs.size() > 1 ? std::sqrt(var / double(xs.size() - 1)) : 0.0;
  return s;
}

}  // namespace detail

/// Repeated stratified cross-validation: per repetition the folds are
/// reshuffled from the seed; per fold one classifier per trainable cue is
/// trained on the remaining folds and scored on the held-out one. Reports
/// mean and standard deviation of fused and per-cue accuracies over all
/// folds x repetitions runs.
inline CvReport cross_validate(const LabeledSet& set, const FusionRule& rule,
                               const CvConfig& cfg = {}) {
  set.validate();
  rule.validate(set.cues.size());
  std::size_t pos = 0, neg = 0;
  for (int l : set.labels) (l > 0 ? pos : neg)++;
  require(int(pos) >= cfg.folds && int(neg) >= cfg.folds, Errc::TooFewSamples,
          "need at least `folds` samples per class");

  const std::size_t n = set.size();
  const std::size_t ncues = set.cues.size();
  std::vector<std::vector<double>> cue_acc(ncues);
  std::vector<double> fused_acc;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    Rng rng(cfg.seed + std::uint64_t(rep) * 0x9e3779b97f4a7c15ULL);
    std::vector<int> fold = detail::stratified_folds(set.labels, cfg.folds, rng);

    for (int f = 0; f < cfg.folds; ++f) {
      std::vector<std::size_t> test_idx;
      for (std::size_t i = 0; i < n; ++i)
        if (fold[i] == f) test_idx.push_back(i);
      if (test_idx.empty()) continue;

      // per-cue scores on the held-out fold
      std::vector<std::vector<double>> scores(ncues,
                                              std::vector<double>(test_idx.size(), 0.0));
      for (std::size_t c = 0; c < ncues; ++c) {
        const Cue& cue = set.cues[c];
        if (cue.external()) {
          for (std::size_t t = 0; t < test_idx.size(); ++t)
            scores[c][t] = cue.external_scores[test_idx[t]];
          continue;
        }
        std::vector<std::vector<double>> train_x;
        std::vector<int> train_y;
        for (std::size_t i = 0; i < n; ++i)
          if (fold[i] != f) {
            train_x.push_back(cue.features[i]);
            train_y.push_back(set.labels[i]);
          }
        KernelClassifier clf = KernelClassifier::train(train_x, train_y, cfg.svm);
        for (std::size_t t = 0; t < test_idx.size(); ++t)
          scores[c][t] = clf.decision_score(cue.features[test_idx[t]]);
      }

      std::vector<std::size_t> cue_hits(ncues, 0);
      std::size_t fused_hits = 0;
      for (std::size_t t = 0; t < test_idx.size(); ++t) {
        std::vector<double> s(ncues);
        for (std::size_t c = 0; c < ncues; ++c) {
          s[c] = scores[c][t];
          int pred = s[c] > 0.0 ? kMale : kFemale;
          cue_hits[c] += pred == set.labels[test_idx[t]];
        }
        auto [label, fused_score] = fuse(s, rule);
        fused_hits += label == set.labels[test_idx[t]];
      }
      for (std::size_t c = 0; c < ncues; ++c)
        cue_acc[c].push_back(double(cue_hits[c]) / double(test_idx.size()));
      fused_acc.push_back(double(fused_hits) / double(test_idx.size()));
    }
  }

  CvReport report;
  report.folds = cfg.folds;
  report.repetitions = cfg.repetitions;
  report.seed = cfg.seed;
  for (std::size_t c = 0; c < ncues; ++c)
    report.per_cue.push_back(detail::stats_of(set.cues[c].name, cue_acc[c]));
  report.fused = detail::stats_of("fused", fused_acc);
  return report;
}

}  // namespace trixel
