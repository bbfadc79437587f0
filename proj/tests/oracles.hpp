#pragma once
// Exhaustive reference implementations used to cross-check the library.
// These re-derive every metric from first principles (full candidate
// enumeration, set intersection, triple loops) and stay independent of the
// library's computation paths. They follow the documented conventions:
// score association (s * p) * o, tie order (score desc, then subject node,
// object node, predicate asc), strictly-higher rank counting.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "sgg/core.hpp"
#include "sgg/freq.hpp"
#include "sgg/metrics.hpp"

namespace oracle {

inline int argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline std::vector<sgg::RankedTriplet> rank_bruteforce(const sgg::Prediction& pred,
                                                       const sgg::SceneGraph& g,
                                                       bool constrained, sgg::Task task) {
  const int n = static_cast<int>(g.node_count());
  std::vector<sgg::RankedTriplet> all;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::vector<double>& probs = pred.pair_probs.at({i, j});
      const int num_preds = static_cast<int>(probs.size()) - 1;
      sgg::ClassId sc, oc;
      double sp, op;
      if (task == sgg::Task::PredCls) {
        sc = g.nodes[i];
        oc = g.nodes[j];
        sp = op = 1.0;
      } else {
        sc = argmax(pred.node_probs[i]);
        oc = argmax(pred.node_probs[j]);
        sp = pred.node_probs[i][sc];
        op = pred.node_probs[j][oc];
      }
      std::vector<sgg::PredicateId> preds;
      if (constrained) {
        int best = 1;
        for (int r = 2; r <= num_preds; ++r) {
          if (probs[r] > probs[best]) best = r;
        }
        preds.push_back(best);
      } else {
        for (int r = 1; r <= num_preds; ++r) preds.push_back(r);
      }
      for (sgg::PredicateId r : preds) {
        all.push_back({i, j, sc, r, oc, (sp * probs[r]) * op});
      }
    }
  }
  std::sort(all.begin(), all.end(),
            [](const sgg::RankedTriplet& a, const sgg::RankedTriplet& b) {
              if (a.score != b.score) return a.score > b.score;
              return std::tie(a.subject_node, a.object_node, a.predicate) <
                     std::tie(b.subject_node, b.object_node, b.predicate);
            });
  return all;
}

using TripletIdentity = std::tuple<int, int, sgg::ClassId, sgg::PredicateId, sgg::ClassId>;

inline TripletIdentity identity_of(const sgg::RankedTriplet& t) {
  return {t.subject_node, t.object_node, t.subject_class, t.predicate, t.object_class};
}

// Set-intersection recall on one image over an explicit GT subset.
inline double recall_bruteforce(const sgg::Prediction& pred, const sgg::SceneGraph& g,
                                const std::vector<sgg::FgEdge>& gt_edges, int k,
                                bool constrained, sgg::Task task) {
  const std::vector<sgg::RankedTriplet> ranked = rank_bruteforce(pred, g, constrained, task);
  std::set<TripletIdentity> top;
  for (int c = 0; c < std::min<int>(k, static_cast<int>(ranked.size())); ++c) {
    top.insert(identity_of(ranked[c]));
  }
  std::size_t hit = 0;
  for (const sgg::FgEdge& e : gt_edges) {
    if (top.count({e.subject, e.object, g.nodes[e.subject], e.predicate,
                   g.nodes[e.object]})) {
      ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(gt_edges.size());
}

// Dataset R@K: mean of per-image recalls, images iterated in the order
// given (sorted by graph_id upstream); images whose GT subset is empty are
// skipped. n < 0 disables the n-shot restriction.
inline std::pair<double, std::size_t> dataset_recall_bruteforce(
    const std::vector<sgg::Prediction>& preds, const std::vector<sgg::SceneGraph>& graphs,
    const sgg::TripletCounts* counts, std::int64_t n, int k, bool constrained,
    sgg::Task task) {
  double sum = 0.0;
  std::size_t images = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const sgg::SceneGraph& g = graphs[i];
    std::vector<sgg::FgEdge> gt;
    for (const sgg::FgEdge& e : g.fg_edges) {
      if (n >= 0 &&
          counts->count({g.nodes[e.subject], e.predicate, g.nodes[e.object]}) > n) {
        continue;
      }
      gt.push_back(e);
    }
    if (gt.empty()) continue;
    sum += recall_bruteforce(preds[i], g, gt, k, constrained, task);
    ++images;
  }
  return {images ? sum / static_cast<double>(images) : 0.0, images};
}

// Triple-loop rank: 1 + #candidates on the GT pair with strictly higher score.
inline std::int64_t triplet_rank_bruteforce(const sgg::Prediction& pred,
                                            const sgg::SceneGraph& g,
                                            const sgg::FgEdge& e, sgg::Task task) {
  const std::vector<double>& probs = pred.pair_probs.at({e.subject, e.object});
  const int num_preds = static_cast<int>(probs.size()) - 1;
  std::int64_t higher = 0;
  if (task == sgg::Task::PredCls) {
    const double gt = probs[e.predicate];
    for (int r = 1; r <= num_preds; ++r) {
      if (probs[r] > gt) ++higher;
    }
    return 1 + higher;
  }
  const std::vector<double>& sp = pred.node_probs[e.subject];
  const std::vector<double>& op = pred.node_probs[e.object];
  const double gt = (sp[g.nodes[e.subject]] * probs[e.predicate]) * op[g.nodes[e.object]];
  for (double s : sp) {
    for (int r = 1; r <= num_preds; ++r) {
      for (double o : op) {
        if ((s * probs[r]) * o > gt) ++higher;
      }
    }
  }
  return 1 + higher;
}

inline double triplet_recall_bruteforce(const std::vector<sgg::Prediction>& preds,
                                        const std::vector<sgg::SceneGraph>& graphs, int k,
                                        sgg::Task task) {
  std::int64_t hits = 0, total = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (const sgg::FgEdge& e : graphs[i].fg_edges) {
      ++total;
      if (triplet_rank_bruteforce(preds[i], graphs[i], e, task) <= k) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

inline double weighted_triplet_recall_bruteforce(
    const std::vector<sgg::Prediction>& preds, const std::vector<sgg::SceneGraph>& graphs,
    const sgg::TripletCounts& counts, int k, sgg::Task task) {
  double hit_weight = 0.0, normalizer = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const sgg::SceneGraph& g = graphs[i];
    for (const sgg::FgEdge& e : g.fg_edges) {
      const std::int64_t n_t =
          counts.count({g.nodes[e.subject], e.predicate, g.nodes[e.object]});
      const double w = 1.0 / static_cast<double>(n_t + 1);
      normalizer += w;
      if (triplet_rank_bruteforce(preds[i], g, e, task) <= k) hit_weight += w;
    }
  }
  return hit_weight / normalizer;
}

inline std::pair<double, std::size_t> mean_recall_bruteforce(
    const std::vector<sgg::Prediction>& preds, const std::vector<sgg::SceneGraph>& graphs,
    int k, bool constrained, sgg::Task task) {
  std::map<sgg::PredicateId, std::pair<std::int64_t, std::int64_t>> per_class;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const sgg::SceneGraph& g = graphs[i];
    if (g.fg_edges.empty()) continue;
    const std::vector<sgg::RankedTriplet> ranked =
        rank_bruteforce(preds[i], g, constrained, task);
    std::set<TripletIdentity> top;
    for (int c = 0; c < std::min<int>(k, static_cast<int>(ranked.size())); ++c) {
      top.insert(identity_of(ranked[c]));
    }
    for (const sgg::FgEdge& e : g.fg_edges) {
      auto& [hit, total] = per_class[e.predicate];
      ++total;
      if (top.count({e.subject, e.object, g.nodes[e.subject], e.predicate,
                     g.nodes[e.object]})) {
        ++hit;
      }
    }
  }
  double sum = 0.0;
  for (const auto& [cls, ht] : per_class) {
    sum += static_cast<double>(ht.first) / static_cast<double>(ht.second);
  }
  return {per_class.empty() ? 0.0 : sum / static_cast<double>(per_class.size()),
          per_class.size()};
}

}  // namespace oracle
