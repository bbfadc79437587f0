#pragma once
// Evaluation metrics: image-level R@K (graph-constrained and
// unconstrained), zero/n-shot recall, triplet-level recall, weighted
// triplet recall, and mean recall.
//
// Ranking conventions, shared with the brute-force oracles in the tests:
//  - a candidate is (subject node, object node, subject class, predicate,
//    object class) with predicate != BG;
//  - candidate classes are ground truth in PredCls and the argmax node
//    prediction in SGCls (argmax ties break toward the lower class id);
//  - score = (subject_prob * predicate_prob) * object_prob, in exactly
//    that association;
//  - image ranking sorts by score descending, ties by (subject node,
//    object node, predicate) ascending;
//  - triplet ranks count candidates on the same ordered pair with
//    strictly higher score, so ties resolve in the GT triplet's favor.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sgg/core.hpp"
#include "sgg/freq.hpp"

namespace sgg {

// Model output for one image: per-node class distributions and a
// distribution over 1 + C_pred predicates (BG = index 0) for every
// ordered node pair.
struct Prediction {
  std::string graph_id;
  std::vector<std::vector<double>> node_probs;
  std::map<std::pair<int, int>, std::vector<double>> pair_probs;
};

// Checks coverage and that all distributions sum to 1 within 1e-6.
void validate_prediction(const Prediction& pred, const SceneGraph& graph);

struct RankedTriplet {
  int subject_node = 0;
  int object_node = 0;
  ClassId subject_class = 0;
  PredicateId predicate = 0;
  ClassId object_class = 0;
  double score = 0.0;
};

// Descending candidate ranking for one image. Unconstrained enumerates
// every non-BG predicate per pair; constrained keeps only each pair's
// argmax non-BG predicate.
std::vector<RankedTriplet> rank_triplets(const Prediction& pred,
                                         const SceneGraph& graph,
                                         bool constrained, Task task);

struct GtTriplet {
  int subject_node = 0;
  int object_node = 0;
  ClassId subject_class = 0;
  PredicateId predicate = 0;
  ClassId object_class = 0;
};

std::vector<GtTriplet> gt_triplets(const SceneGraph& graph);

// |Top_K ∩ GT| / |GT|. A match requires identical nodes and an identical
// class triple; each GT triplet matches at most once. Throws
// DegenerateInputError on empty GT (the image must be skipped, not zero).
double image_recall_at_k(const std::vector<RankedTriplet>& ranked,
                         const std::vector<GtTriplet>& gt, int k);

// GT restricted to triplets with n_t <= n; images left with no qualifying
// triplet are dropped.
std::vector<SceneGraph> n_shot_filter(const std::vector<SceneGraph>& graphs,
                                      const TripletCounts& counts,
                                      std::int64_t n);

// 1 + number of candidate triplets on the same ordered pair with strictly
// higher score. In PredCls candidates are the non-BG predicates; in SGCls
// the full class-pair x predicate space, counted without materializing it.
std::int64_t triplet_rank(const Prediction& pred, const SceneGraph& graph,
                          const FgEdge& edge, Task task);

// Fraction of GT triplets (pooled over the dataset) with rank <= K.
double triplet_recall(const std::vector<Prediction>& preds,
                      const std::vector<SceneGraph>& graphs, int k, Task task);

// Eq-style weighted variant: sum_t w_t [rank_t <= K] with
// w_t = (1/(n_t+1)) / sum_t' 1/(n_t'+1), pooled over the dataset.
double weighted_triplet_recall(const std::vector<Prediction>& preds,
                               const std::vector<SceneGraph>& graphs,
                               const TripletCounts& counts, int k, Task task);

// Macro-average over predicate classes of the dataset-pooled image-level
// recall restricted to each class.
double mean_recall(const std::vector<Prediction>& preds,
                   const std::vector<SceneGraph>& graphs, int k,
                   bool constrained, Task task);

struct MetricRow {
  std::string metric;   // R, R_ZS, R_NS<n>, R_tr, wR_tr, mR
  int k = 0;
  std::string variant;  // constrained | unconstrained | - (triplet-level)
  double value = 0.0;
  std::size_t count = 0;  // images, triplets or classes evaluated
};

struct MetricReport {
  std::vector<MetricRow> rows;

  const MetricRow* find(const std::string& metric, int k,
                        const std::string& variant) const;
  // find() or throw.
  double value_of(const std::string& metric, int k,
                  const std::string& variant) const;
};

struct SuiteOptions {
  std::vector<int> ks = {50};
  std::vector<std::int64_t> nshots = {0};  // n = 0 emits the R_ZS rows
  bool constrained_variant = false;  // also emit graph-constrained rows
  Task task = Task::PredCls;
};

// Full suite over predictions and graphs aligned by graph_id.
MetricReport recall_suite(const std::vector<Prediction>& preds,
                          const std::vector<SceneGraph>& graphs,
                          const TripletCounts& counts,
                          const SuiteOptions& options);

// The Freq baseline as a predictor: one-hot ground-truth node labels and
// P(R|s,o) as every pair's distribution (BG keeps zero mass). c_obj sizes
// the one-hot node rows.
Prediction freq_baseline_prediction(const FreqModel& model, const SceneGraph& graph,
                                    int c_obj);

// Prediction file: JSONL, one object per graph:
//   {"graph_id": .., "node_probs": [[..]], "pair_probs": [{"s","o","probs"}]}
std::vector<Prediction> read_predictions_jsonl(const std::string& path);
void write_predictions_jsonl(const std::string& path,
                             const std::vector<Prediction>& preds);

// CSV schema: metric,K,variant,value,count
std::string report_to_csv(const MetricReport& report);
std::string report_to_json(const MetricReport& report);
MetricReport report_from_csv(const std::string& text);

}  // namespace sgg
