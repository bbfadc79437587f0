#pragma once
// Scene-graph data model: object-labeled nodes, FG predicate edges over
// ordered node pairs, the implicit BG complement, batching and density
// accounting, dataset statistics.
//
// Conventions used across the library:
//  - edges are directed subject -> object, so a graph with N nodes has a
//    pair universe of size N*(N-1);
//  - predicate id 0 is reserved for BG and never appears on an FG edge;
//  - BG pairs are never materialized as records, they are the set
//    complement of the FG edges and are enumerated on demand.
//
// All types are immutable after construction by convention; every
// operation here is a pure function.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgg/errors.hpp"

namespace sgg {

using ClassId = int;      // object class id, >= 0
using PredicateId = int;  // predicate class id, >= 1 for FG edges; 0 is BG

// PredCls labels predicates given ground-truth object labels; SGCls also
// predicts the object labels.
enum class Task { PredCls, SGCls };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct FgEdge {
  int subject = 0;
  int object = 0;
  PredicateId predicate = 0;

  friend bool operator==(const FgEdge&, const FgEdge&) = default;
};

struct SceneGraph {
  std::string graph_id;
  std::vector<ClassId> nodes;  // index = node id
  std::vector<FgEdge> fg_edges;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t fg_count() const { return fg_edges.size(); }

  // Size of the ordered-pair universe, N*(N-1).
  std::size_t pair_count() const {
    const std::size_t n = nodes.size();
    return n < 2 ? 0 : n * (n - 1);
  }
  std::size_t bg_count() const { return pair_count() - fg_edges.size(); }
};

// Checks all SceneGraph invariants and returns the canonical form.
// Duplicate FG edges on the same ordered pair are collapsed keeping the
// first occurrence, so validation is idempotent.
// Throws ValidationError on self-loops, out-of-range node indices,
// predicate id < 1, or an empty node list.
SceneGraph validate_graph(const SceneGraph& raw);

// A collection of scene graphs treated as one loss unit. There are no BG
// pairs between different graphs, so m_bg = sum_g N_g*(N_g-1) - m_fg.
struct Batch {
  std::vector<SceneGraph> graphs;
  std::size_t n_total = 0;
  std::size_t m_fg = 0;
  std::size_t m_bg = 0;
  double density = 0.0;  // m_fg / (m_fg + m_bg); 0 when the universe is empty
};

Batch make_batch(std::vector<SceneGraph> graphs);

// d = M_FG / (M_FG + M_BG). Throws DegenerateInputError when the pair
// universe is empty (every graph has N <= 1).
double graph_density(const SceneGraph& g);
double graph_density(const Batch& b);

// Exactly the ordered pairs (i, j), i != j, with no FG edge, in
// lexicographic order. |result| = N*(N-1) - M_FG.
std::vector<std::pair<int, int>> enumerate_bg_pairs(const SceneGraph& g);

struct TripletCounts;  // freq.hpp

struct StatsReport {
  std::size_t image_count = 0;
  std::size_t unique_triplet_count = 0;
  std::size_t total_triplet_count = 0;
  // Node-count statistics over graphs.
  double n_min = 0, n_max = 0, n_mean = 0, n_std = 0;
  // Per-graph density statistics over graphs with N >= 2 (density is
  // undefined for single-node graphs; those are excluded here).
  double d_min = 0, d_max = 0, d_mean = 0, d_std = 0;
  std::size_t density_count = 0;  // graphs contributing to the d stats
  // Zero-shot triplet counts, present when a training count table was
  // supplied: triplets of this dataset with n_t = 0.
  std::optional<std::size_t> zs_unique;
  std::optional<std::size_t> zs_total;
};

StatsReport dataset_stats(const std::vector<SceneGraph>& dataset,
                          const TripletCounts* train_counts = nullptr);

// JSONL scene-graph format, one object per line:
//   {"graph_id": "...", "nodes": [..], "fg_edges": [[s, o, p], ..]}
// Graphs are validated on read.
std::vector<SceneGraph> read_graphs_jsonl(const std::string& path);
void write_graphs_jsonl(const std::string& path,
                        const std::vector<SceneGraph>& graphs);

}  // namespace sgg
