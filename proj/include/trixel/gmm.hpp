#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "trixel/error.hpp"
#include "trixel/rng.hpp"

namespace trixel {

using Color = std::array<double, 3>;

inline double color_dist2(const Color& a, const Color& b) {
  double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

/// One weighted 3-D Gaussian with cached inverse covariance and normalizer.
struct GaussianComponent {
  double weight = 0.0;
  Color mean{0.0, 0.0, 0.0};
  std::array<double, 9> cov{};      // row-major 3x3
  std::array<double, 9> cov_inv{};
  double log_norm = 0.0;            // -0.5 * log((2*pi)^3 * det)

  bool usable() const { return weight > 0.0; }

  /// Fills cov_inv / log_norm from cov. The variance floor added by the
  /// fitting code keeps the matrix positive definite.
  void finalize() {
    const auto& m = cov;
    double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                 m[2] * (m[3] * m[7] - m[4] * m[6]);
    require(det > 0.0, Errc::BadFormat, "covariance is not positive definite");
    cov_inv = {(m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det,
               (m[1] * m[5] - m[2] * m[4]) / det, (m[5] * m[6] - m[3] * m[8]) / det,
               (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
               (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det,
               (m[0] * m[4] - m[1] * m[3]) / det};
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    log_norm = -0.5 * (3.0 * kLog2Pi + std::log(det));
  }

  double log_density(const Color& z) const {
    double d0 = z[0] - mean[0], d1 = z[1] - mean[1], d2 = z[2] - mean[2];
    double q = d0 * (cov_inv[0] * d0 + cov_inv[1] * d1 + cov_inv[2] * d2) +
               d1 * (cov_inv[3] * d0 + cov_inv[4] * d1 + cov_inv[5] * d2) +
               d2 * (cov_inv[6] * d0 + cov_inv[7] * d1 + cov_inv[8] * d2);
    return log_norm - 0.5 * q;
  }

  double density(const Color& z) const { return std::exp(log_density(z)); }
};

/// Mixture over K components; components with zero weight are inert.
struct Gmm {
  std::vector<GaussianComponent> components;

  double density(const Color& z) const {
    double p = 0.0;
    for (const GaussianComponent& c : components)
      if (c.usable()) p += c.weight * c.density(z);
    return p;
  }

  /// argmax_k of weight_k * N(z; k); ties resolve to the lowest k.
  int most_likely_component(const Color& z) const {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < int(components.size()); ++k) {
      const GaussianComponent& c = components[k];
      if (!c.usable()) continue;
      double s = std::log(c.weight) + c.log_density(z);
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    require(best >= 0, Errc::EmptyClass, "mixture has no usable components");
    return best;
  }
};

struct GmmPair {
  Gmm fg;
  Gmm bg;
};

namespace detail {

/// Weighted k-means with k-means++ seeding and at most `max_lloyd` update
/// rounds. Deterministic given the RNG. Returns per-sample cluster indices;
/// clusters may end up empty when the data has fewer distinct colors than K.
inline std::vector<int> weighted_kmeans(const std::vector<Color>& colors,
                                        const std::vector<double>& weights, int k, Rng& rng,
                                        int max_lloyd = 50) {
  const std::size_t n = colors.size();
  std::vector<Color> centers;
  centers.reserve(k);

  double total_w = 0.0;
  for (double w : weights) total_w += w;

  // k-means++: first center by weight, then proportional to weight * D^2
  auto pick_weighted = [&](const std::vector<double>& mass, double sum) -> std::size_t {
    double r = rng.next_double() * sum;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += mass[i];
      if (r < acc) return i;
    }
    return n - 1;
  };

  std::vector<double> mass(n);
  if (total_w > 0.0) {
    centers.push_back(colors[pick_weighted(weights, total_w)]);
  } else {
    centers.push_back(colors[0]);
  }
  std::vector<double> d2(n);
  while (int(centers.size()) < k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = color_dist2(colors[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c)
        best = std::min(best, color_dist2(colors[i], centers[c]));
      d2[i] = best;
      mass[i] = (weights[i] > 0.0 ? weights[i] : 0.0) * best;
      sum += mass[i];
    }
    if (sum <= 0.0) break;  // every sample coincides with a center
    centers.push_back(colors[pick_weighted(mass, sum)]);
  }

  std::vector<int> assign(n, 0);
  for (int round = 0; round < max_lloyd; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = color_dist2(colors[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        double d = color_dist2(colors[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = int(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && round > 0) break;
    std::vector<Color> sums(centers.size(), {0.0, 0.0, 0.0});
    std::vector<double> ws(centers.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double w = weights[i] > 0.0 ? weights[i] : 0.0;
      ws[assign[i]] += w;
      for (int c = 0; c < 3; ++c) sums[assign[i]][c] += w * colors[i][c];
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (ws[c] > 0.0)
        for (int j = 0; j < 3; ++j) centers[c][j] = sums[c][j] / ws[c];
  }
  return assign;
}

/// Component statistics from hard assignments: weighted mean, weighted
/// covariance plus the variance floor, and mass-fraction weights.
inline Gmm components_from_assignment(const std::vector<Color>& colors,
                                      const std::vector<double>& weights,
                                      const std::vector<int>& assign, int k,
                                      double variance_floor) {
  Gmm out;
  out.components.resize(k);
  std::vector<double> mass(k, 0.0);
  std::vector<Color> mean_sum(k, {0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < colors.size(); ++i) {
    double w = weights[i] > 0.0 ? weights[i] : 0.0;
    int a = assign[i];
    mass[a] += w;
    for (int c = 0; c < 3; ++c) mean_sum[a][c] += w * colors[i][c];
  }
  double total = 0.0;
  for (double m : mass) total += m;

  std::vector<std::array<double, 9>> cov_sum(k, std::array<double, 9>{});
  std::vector<Color> means(k, {0.0, 0.0, 0.0});
  for (int a = 0; a < k; ++a)
    if (mass[a] > 0.0)
      for (int c = 0; c < 3; ++c) means[a][c] = mean_sum[a][c] / mass[a];
  for (std::size_t i = 0; i < colors.size(); ++i) {
    double w = weights[i] > 0.0 ? weights[i] : 0.0;
    if (w <= 0.0) continue;
    int a = assign[i];
    double d[3] = {colors[i][0] - means[a][0], colors[i][1] - means[a][1],
                   colors[i][2] - means[a][2]};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cov_sum[a][r * 3 + c] += w * d[r] * d[c];
  }

  for (int a = 0; a < k; ++a) {
    GaussianComponent& comp = out.components[a];
    if (mass[a] <= 0.0 || total <= 0.0) {
      comp.weight = 0.0;
      continue;
    }
    comp.weight = mass[a] / total;
    comp.mean = means[a];
    for (int j = 0; j < 9; ++j) comp.cov[j] = cov_sum[a][j] / mass[a];
    comp.cov[0] += variance_floor;
    comp.cov[4] += variance_floor;
    comp.cov[8] += variance_floor;
    comp.finalize();
  }
  return out;
}

}  // namespace detail

}  // namespace trixel
