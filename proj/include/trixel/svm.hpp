#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "trixel/error.hpp"

namespace trixel {

struct SvmParams {
  double C = 1.0;
  double gamma = -1.0;    // <= 0: use 1 / feature count
  double kkt_tol = 1e-3;
  int max_passes = 200;   // full sweeps without progress before giving up

  double effective_gamma(std::size_t dim) const {
    return gamma > 0.0 ? gamma : 1.0 / double(dim > 0 ? dim : 1);
  }
};

/// RBF-kernel support vector machine trained with sequential minimal
/// optimization (pairwise coordinate ascent on the dual) to the KKT
/// tolerance. Deterministic: candidate pairs are visited in fixed order and
/// nothing is randomized.
class KernelClassifier {
 public:
  static KernelClassifier train(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y, const SvmParams& params = {}) {
    const std::size_t n = x.size();
    require(n >= 2 && y.size() == n, Errc::TooFewSamples, "need at least two samples");
    bool has_pos = false, has_neg = false;
    for (int v : y) (v > 0 ? has_pos : has_neg) = true;
    require(has_pos && has_neg, Errc::SingleClass, "training needs both classes");

    Solver s(x, y, params);
    s.run();
    return s.finish();
  }

  double decision_score(const std::vector<double>& v) const {
    require(v.size() == dim_, Errc::LayoutMismatch, "feature length differs from training");
    double f = bias_;
    for (std::size_t i = 0; i < sv_.size(); ++i)
      f += dual_[i] * kernel(sv_[i], v, gamma_);
    return f;
  }

  /// positive score = Male by convention
  int predict(const std::vector<double>& v) const { return decision_score(v) > 0.0 ? 1 : -1; }

  double bias() const { return bias_; }
  std::size_t support_count() const { return sv_.size(); }

 private:
  static double kernel(const std::vector<double>& a, const std::vector<double>& b,
                       double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = a[i] - b[i];
      d2 += d * d;
    }
    return std::exp(-gamma * d2);
  }

  struct Solver {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;
    SvmParams p;
    double gamma;
    std::size_t n;
    std::vector<double> alpha, err;
    std::vector<double> kmat;  // n x n kernel matrix
    double b = 0.0;

    Solver(const std::vector<std::vector<double>>& x_, const std::vector<int>& y_,
           const SvmParams& p_)
        : x(x_), y(y_), p(p_), gamma(p_.effective_gamma(x_[0].size())), n(x_.size()),
          alpha(n, 0.0), err(n, 0.0), kmat(n * n) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
          kmat[i * n + j] = kmat[j * n + i] = kernel(x[i], x[j], gamma);
      for (std::size_t i = 0; i < n; ++i) err[i] = -double(y[i]);  // f == 0 initially
    }

    double k(std::size_t i, std::size_t j) const { return kmat[i * n + j]; }

    bool take_step(std::size_t i1, std::size_t i2) {
      if (i1 == i2) return false;
      double a1 = alpha[i1], a2 = alpha[i2];
      double y1 = y[i1], y2 = y[i2];
      double e1 = err[i1], e2 = err[i2];
      double s = y1 * y2;
      double lo, hi;
      if (s < 0.0) {
        lo = std::max(0.0, a2 - a1);
        hi = std::min(p.C, p.C + a2 - a1);
      } else {
        lo = std::max(0.0, a1 + a2 - p.C);
        hi = std::min(p.C, a1 + a2);
      }
      if (lo >= hi) return false;
      double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
      double eta = k11 + k22 - 2.0 * k12;
      double a2_new;
      if (eta > 0.0) {
        a2_new = a2 + y2 * (e1 - e2) / eta;
        a2_new = std::min(std::max(a2_new, lo), hi);
      } else {
        // flat direction: test both clip ends on the dual objective
        double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
        double f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22;
        double l1 = a1 + s * (a2 - lo);
        double h1 = a1 + s * (a2 - hi);
        double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                        s * lo * l1 * k12;
        double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                        s * hi * h1 * k12;
        if (obj_lo < obj_hi - 1e-12)
          a2_new = lo;
        else if (obj_lo > obj_hi + 1e-12)
          a2_new = hi;
        else
          return false;
      }
      if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
      double a1_new = a1 + s * (a2 - a2_new);

      double b1 = e1 + y1 * (a1_new - a1) * k11 + y2 * (a2_new - a2) * k12 + b;
      double b2 = e2 + y1 * (a1_new - a1) * k12 + y2 * (a2_new - a2) * k22 + b;
      double b_new;
      if (a1_new > 0.0 && a1_new < p.C)
        b_new = b1;
      else if (a2_new > 0.0 && a2_new < p.C)
        b_new = b2;
      else
        b_new = 0.5 * (b1 + b2);

      double db = b_new - b;
      for (std::size_t i = 0; i < n; ++i)
        err[i] += y1 * (a1_new - a1) * k(i1, i) + y2 * (a2_new - a2) * k(i2, i) - db;
      alpha[i1] = a1_new;
      alpha[i2] = a2_new;
      b = b_new;
      return true;
    }

    bool examine(std::size_t i2) {
      double y2 = y[i2], a2 = alpha[i2], e2 = err[i2];
      double r2 = e2 * y2;
      if (!((r2 < -p.kkt_tol && a2 < p.C) || (r2 > p.kkt_tol && a2 > 0.0))) return false;

      // best second-choice: maximize |E1 - E2| over non-bound points
      std::size_t best = n;
      double best_gap = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] <= 0.0 || alpha[i] >= p.C) continue;
        double gap = std::abs(err[i] - e2);
        if (gap > best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      if (best < n && take_step(best, i2)) return true;
      for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 0.0 && alpha[i] < p.C && take_step(i, i2)) return true;
      for (std::size_t i = 0; i < n; ++i)
        if (take_step(i, i2)) return true;
      return false;
    }

    void run() {
      bool examine_all = true;
      int changed = 0;
      int sweeps = 0;
      while ((changed > 0 || examine_all) && sweeps++ < p.max_passes) {
        changed = 0;
        if (examine_all) {
          for (std::size_t i = 0; i < n; ++i) changed += examine(i);
        } else {
          for (std::size_t i = 0; i < n; ++i)
            if (alpha[i] > 0.0 && alpha[i] < p.C) changed += examine(i);
        }
        if (examine_all)
          examine_all = false;
        else if (changed == 0)
          examine_all = true;
      }
    }

    KernelClassifier finish() const {
      KernelClassifier c;
      c.gamma_ = gamma;
      c.bias_ = -b;  // err was f - y with f = sum - b; flip to f = sum + bias
      c.dim_ = x[0].size();
      for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 0.0) {
          c.sv_.push_back(x[i]);
          c.dual_.push_back(alpha[i] * y[i]);
        }
      return c;
    }
  };

  std::vector<std::vector<double>> sv_;
  std::vector<double> dual_;
  double bias_ = 0.0;
  double gamma_ = 1.0;
  std::size_t dim_ = 0;
};

}  // namespace trixel
