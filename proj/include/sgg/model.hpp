#pragma once
// Minimal trainable node and edge classifiers: single-layer linear softmax
// heads over synthetic features with manual gradients, plain SGD under any
// LossConfig, optional frequency-bias conditioning of the predicate
// logits, edge subsampling, and a finite-difference gradient checker.
//
// The edge head outputs 1 + C_pred classes with column 0 = BG. When a
// FreqModel is attached, log P(R|s,o) is added to the non-BG logits before
// the softmax; (s,o) are ground-truth labels in PredCls and argmax node
// predictions in SGCls.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgg/core.hpp"
#include "sgg/freq.hpp"
#include "sgg/losses.hpp"
#include "sgg/metrics.hpp"

namespace sgg {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Per-graph features: one vector per node, one per ordered pair (FG edges
// and BG pairs alike).
struct FeatureBundle {
  std::vector<std::vector<double>> node_features;
  std::map<std::pair<int, int>, std::vector<double>> edge_features;
};

struct ClassifierModel {
  Matrix node_w;               // D_v x C_obj
  std::vector<double> node_b;  // C_obj
  Matrix edge_w;               // D_e x (1 + C_pred), column 0 = BG
  std::vector<double> edge_b;  // 1 + C_pred
  std::optional<FreqModel> freq_bias;
  std::uint64_t rng_seed = 0;

  int num_object_classes() const { return static_cast<int>(node_b.size()); }
  int num_predicates() const { return static_cast<int>(edge_b.size()) - 1; }
  std::size_t node_dim() const { return node_w.rows; }
  std::size_t edge_dim() const { return edge_w.rows; }
  std::size_t parameter_count() const {
    return node_w.data.size() + node_b.size() + edge_w.data.size() + edge_b.size();
  }
};

// Weights uniform in [-0.01, 0.01] from the seeded generator, biases zero.
ClassifierModel init_model(std::size_t node_dim, std::size_t edge_dim, int c_obj,
                           int c_pred, std::uint64_t seed);

Prediction forward(const ClassifierModel& model, const SceneGraph& graph,
                   const FeatureBundle& feats, Task task);

struct Gradients {
  Matrix node_w;
  std::vector<double> node_b;
  Matrix edge_w;
  std::vector<double> edge_b;
};

// Uniform sample without replacement of at most max_fg FG edges and max_bg
// BG pairs, pooled over the batch; deterministic given the seed. Caps above
// availability return everything.
struct SampledEdges {
  std::vector<EdgeKey> fg;
  std::vector<EdgeKey> bg;

  double density() const {
    const std::size_t m = fg.size() + bg.size();
    return m > 0 ? static_cast<double>(fg.size()) / static_cast<double>(m) : 0.0;
  }
};

SampledEdges sample_edges(const Batch& batch, std::size_t max_fg, std::size_t max_bg,
                          std::uint64_t seed);

// Loss and parameter gradients over a batch. The node loss is the mean
// cross-entropy over all batch nodes (zero in PredCls); edge
// cross-entropies enter through group_edge_weights. When `sample` is given
// only the sampled edges contribute and the density is the sample's.
// Throws DegenerateBatchError when the (sampled) batch has no FG edges.
std::pair<LossValue, Gradients> loss_and_gradients(
    const ClassifierModel& model, const Batch& batch,
    const std::vector<FeatureBundle>& feats, const LossConfig& cfg, Task task,
    const SampledEdges* sample = nullptr);

// parameters - learning_rate * gradients. Throws on non-finite gradients.
ClassifierModel sgd_step(ClassifierModel model, const Gradients& grads,
                         double learning_rate);

struct TrainConfig {
  LossConfig loss;
  double learning_rate = 0.1;
  int epochs = 10;
  int batch_size = 6;
  std::optional<std::pair<std::size_t, std::size_t>> edge_sampling;  // max_fg, max_bg
  std::uint64_t seed = 0;
  Task task = Task::PredCls;
  bool freq_bias = false;
  double freq_smoothing = 1.0;
  // 0 = infer the vocabulary from the training graphs.
  int num_object_classes = 0;
  int num_predicates = 0;
  // Batches without FG edges keep their node term and skip the edge term;
  // set to false to fail hard instead.
  bool skip_degenerate = true;
};

struct EpochStats {
  int epoch = 0;
  double l_node = 0.0;
  double l_fg = 0.0;
  double l_bg = 0.0;
  double density = 0.0;
  // Mean effective per-batch edge counts (equal the full counts when edge
  // sampling is off).
  double sampled_fg = 0.0;
  double sampled_bg = 0.0;
  std::size_t degenerate_batches = 0;
  std::optional<double> val_node_accuracy;  // SGCls only
  std::optional<double> val_fg_accuracy;    // argmax non-BG predicate vs label
};

struct TrainResult {
  ClassifierModel model;
  std::vector<EpochStats> history;
};

TrainResult train(const std::vector<SceneGraph>& graphs,
                  const std::vector<FeatureBundle>& features, const TrainConfig& cfg,
                  const std::vector<SceneGraph>* val_graphs = nullptr,
                  const std::vector<FeatureBundle>* val_features = nullptr);

// Central-difference check of `claimed` against the loss surface; returns
// the max relative error over all parameters (or a seeded random subset
// when the model has more than max_params of them).
double grad_check_against(const ClassifierModel& model, const Batch& batch,
                          const std::vector<FeatureBundle>& feats,
                          const LossConfig& cfg, Task task, double epsilon,
                          const Gradients& claimed, std::size_t max_params = 4096,
                          std::uint64_t subset_seed = 1);

// Same, checking the analytic gradients of loss_and_gradients.
double grad_check(const ClassifierModel& model, const Batch& batch,
                  const std::vector<FeatureBundle>& feats, const LossConfig& cfg,
                  Task task, double epsilon, std::size_t max_params = 4096,
                  std::uint64_t subset_seed = 1);

// Versioned JSON checkpoint (weights as nested arrays, config echo, seed).
struct Checkpoint {
  ClassifierModel model;
  Task task = Task::PredCls;
  std::string config_echo;  // JSON text
};

void save_checkpoint(const std::string& path, const ClassifierModel& model, Task task,
                     const std::string& config_echo_json = "{}");
Checkpoint load_checkpoint(const std::string& path);

// Feature file: JSONL parallel to the graph file,
//   {"graph_id": .., "node_features": [[..]], "edge_features": [{"s","o","f"}]}
void write_features_jsonl(const std::string& path,
                          const std::vector<SceneGraph>& graphs,
                          const std::vector<FeatureBundle>& features);
std::vector<std::pair<std::string, FeatureBundle>> read_features_jsonl(
    const std::string& path);
// Reorders read features to match `graphs`; throws on missing ids.
std::vector<FeatureBundle> align_features(
    const std::vector<SceneGraph>& graphs,
    std::vector<std::pair<std::string, FeatureBundle>> features);

}  // namespace sgg
