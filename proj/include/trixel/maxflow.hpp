#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "trixel/error.hpp"

namespace trixel {

/// Boykov-Kolmogorov max-flow / min-cut with the two search trees S and T.
/// Nodes outside both trees are free; active nodes form the outer border of
/// their tree and grow it along non-saturated edges. When the trees touch,
/// the bottleneck flow is pushed (augmentation); nodes whose parent edge
/// saturates become orphans and are re-attached or freed in the adoption
/// stage. Terminates when no active node remains; the S tree is then exactly
/// the source side of a minimum cut.
class BkMaxflow {
 public:
  explicit BkMaxflow(int node_count)
      : tr_cap_(node_count, 0.0),
        parent_(node_count, kNoParent),
        tree_(node_count, kFree),
        ts_(node_count, 0),
        dist_(node_count, 0),
        first_arc_(node_count, -1) {}

  /// Terminal capacities accumulate; opposite pairs cancel into flow.
  void add_tweights(int u, double source_cap, double sink_cap) {
    require(source_cap >= 0.0 && sink_cap >= 0.0, Errc::BadFormat,
            "terminal capacities must be non-negative");
    double d = tr_cap_[u];
    if (d > 0.0)
      source_cap += d;
    else
      sink_cap -= d;
    flow_ += source_cap < sink_cap ? source_cap : sink_cap;
    tr_cap_[u] = source_cap - sink_cap;
  }

  void add_edge(int u, int v, double cap, double rev_cap) {
    require(cap >= 0.0 && rev_cap >= 0.0, Errc::BadFormat, "edge capacities must be non-negative");
    int a = int(arcs_.size());
    arcs_.push_back({v, first_arc_[u], cap});
    first_arc_[u] = a;
    arcs_.push_back({u, first_arc_[v], rev_cap});
    first_arc_[v] = a + 1;
  }

  double solve() {
    init_trees();
    while (true) {
      int connector = grow();
      if (connector == kNoArc) break;
      ++time_;
      augment(connector);
      adopt();
    }
    return flow_;
  }

  /// True when u ended on the source side of the minimum cut.
  bool in_source_side(int u) const { return tree_[u] == kSource; }

 private:
  static constexpr int kNoParent = -3;
  static constexpr int kTerminal = -1;
  static constexpr int kOrphan = -2;
  static constexpr int kNoArc = -1;
  enum Tree : std::uint8_t { kFree = 0, kSource = 1, kSink = 2 };

  struct Arc {
    int head;
    int next;      // next arc out of the same tail
    double r_cap;  // residual capacity
  };

  // parent_[u]: arc from u toward its parent, or kTerminal / kOrphan / kNoParent.
  // In the S tree residual flow runs parent -> u (sister arc); in the T tree
  // it runs u -> parent (the stored arc itself).

  void set_active(int u) { active_.push_back(u); }

  int next_active() {
    while (!active_.empty()) {
      int u = active_.front();
      active_.pop_front();
      if (tree_[u] != kFree) return u;
    }
    return -1;
  }

  void init_trees() {
    for (int u = 0; u < int(tr_cap_.size()); ++u) {
      if (tr_cap_[u] > 0.0) {
        tree_[u] = kSource;
        parent_[u] = kTerminal;
        dist_[u] = 1;
        ts_[u] = 0;
        set_active(u);
      } else if (tr_cap_[u] < 0.0) {
        tree_[u] = kSink;
        parent_[u] = kTerminal;
        dist_[u] = 1;
        ts_[u] = 0;
        set_active(u);
      }
    }
  }

  // grow stage: returns the arc connecting the two trees (directed S -> T),
  // or kNoArc when the trees can no longer touch
  int grow() {
    for (int u = next_active(); u != -1; u = next_active()) {
      if (parent_[u] == kOrphan || parent_[u] == kNoParent) continue;
      Tree side = Tree(tree_[u]);
      for (int a = first_arc_[u]; a != -1; a = arcs_[a].next) {
        double r = side == kSource ? arcs_[a].r_cap : arcs_[a ^ 1].r_cap;
        if (r <= 0.0) continue;
        int v = arcs_[a].head;
        if (tree_[v] == kFree) {
          tree_[v] = side;
          parent_[v] = a ^ 1;  // arc v -> u
          ts_[v] = ts_[u];
          dist_[v] = dist_[u] + 1;
          set_active(v);
        } else if (tree_[v] != side) {
          set_active(u);  // u keeps growing after the augmentation
          return side == kSource ? a : (a ^ 1);
        } else if (ts_[v] <= ts_[u] && dist_[v] > dist_[u] + 1) {
          // same tree: shorter path found, re-parent heuristically
          parent_[v] = a ^ 1;
          ts_[v] = ts_[u];
          dist_[v] = dist_[u] + 1;
        }
      }
    }
    return kNoArc;
  }

  // bottleneck over: source-side path, the connecting arc, sink-side path
  void augment(int connector) {
    double bottleneck = arcs_[connector].r_cap;
    for (int u = arcs_[connector ^ 1].head;;) {  // tail of connector, in S
      int a = parent_[u];
      if (a == kTerminal) {
        if (tr_cap_[u] < bottleneck) bottleneck = tr_cap_[u];
        break;
      }
      if (arcs_[a ^ 1].r_cap < bottleneck) bottleneck = arcs_[a ^ 1].r_cap;
      u = arcs_[a].head;
    }
    for (int u = arcs_[connector].head;;) {  // head of connector, in T
      int a = parent_[u];
      if (a == kTerminal) {
        if (-tr_cap_[u] < bottleneck) bottleneck = -tr_cap_[u];
        break;
      }
      if (arcs_[a].r_cap < bottleneck) bottleneck = arcs_[a].r_cap;
      u = arcs_[a].head;
    }

    arcs_[connector].r_cap -= bottleneck;
    arcs_[connector ^ 1].r_cap += bottleneck;
    for (int u = arcs_[connector ^ 1].head;;) {
      int a = parent_[u];
      if (a == kTerminal) {
        tr_cap_[u] -= bottleneck;
        if (tr_cap_[u] <= 0.0) make_orphan(u);
        break;
      }
      arcs_[a].r_cap += bottleneck;
      arcs_[a ^ 1].r_cap -= bottleneck;
      if (arcs_[a ^ 1].r_cap <= 0.0) make_orphan(u);
      u = arcs_[a].head;
    }
    for (int u = arcs_[connector].head;;) {
      int a = parent_[u];
      if (a == kTerminal) {
        tr_cap_[u] += bottleneck;
        if (tr_cap_[u] >= 0.0) make_orphan(u);
        break;
      }
      arcs_[a ^ 1].r_cap += bottleneck;
      arcs_[a].r_cap -= bottleneck;
      if (arcs_[a].r_cap <= 0.0) make_orphan(u);
      u = arcs_[a].head;
    }
    flow_ += bottleneck;
  }

  void make_orphan(int u) {
    parent_[u] = kOrphan;
    orphans_.push_back(u);
  }

  // does u trace back to a terminal through valid parents? caches distances
  // via timestamps
  bool rooted(int u) {
    int d = 0;
    int v = u;
    while (true) {
      if (ts_[v] == time_) {
        d += dist_[v];
        break;
      }
      int a = parent_[v];
      if (a == kTerminal) {
        d += 1;
        break;
      }
      if (a == kOrphan || a == kNoParent) return false;
      ++d;
      v = arcs_[a].head;
    }
    // second pass: stamp the path with exact distances
    int dd = d;
    for (int w = u; ts_[w] != time_;) {
      dist_[w] = dd--;
      ts_[w] = time_;
      int a = parent_[w];
      if (a == kTerminal) break;
      w = arcs_[a].head;
    }
    return true;
  }

  void adopt() {
    while (!orphans_.empty()) {
      int u = orphans_.front();
      orphans_.pop_front();
      if (parent_[u] != kOrphan) continue;
      Tree side = Tree(tree_[u]);

      int best_arc = kNoArc;
      int best_dist = std::numeric_limits<int>::max();
      for (int a = first_arc_[u]; a != -1; a = arcs_[a].next) {
        double r = side == kSource ? arcs_[a ^ 1].r_cap : arcs_[a].r_cap;
        if (r <= 0.0) continue;
        int v = arcs_[a].head;
        if (tree_[v] != side) continue;
        if (parent_[v] == kOrphan || parent_[v] == kNoParent) continue;
        if (!rooted(v)) continue;
        if (dist_[v] + 1 < best_dist) {
          best_dist = dist_[v] + 1;
          best_arc = a;
        }
      }

      if (best_arc != kNoArc) {
        parent_[u] = best_arc;
        ts_[u] = time_;
        dist_[u] = best_dist;
        continue;
      }

      // no valid parent: free u, orphan its children, reactivate potential
      // parents around it
      for (int a = first_arc_[u]; a != -1; a = arcs_[a].next) {
        int v = arcs_[a].head;
        if (tree_[v] != side) continue;
        double r = side == kSource ? arcs_[a ^ 1].r_cap : arcs_[a].r_cap;
        if (r > 0.0) set_active(v);
        int pv = parent_[v];
        if (pv >= 0 && arcs_[pv].head == u) make_orphan(v);
      }
      tree_[u] = kFree;
      parent_[u] = kNoParent;
    }
  }

  std::vector<double> tr_cap_;
  std::vector<int> parent_;
  std::vector<std::uint8_t> tree_;
  std::vector<int> ts_;
  std::vector<int> dist_;
  std::vector<int> first_arc_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  double flow_ = 0.0;
  int time_ = 0;
};

}  // namespace trixel
