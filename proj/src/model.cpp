#include "sgg/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace sgg {

namespace {

std::vector<double> softmax(std::vector<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& x : z) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : z) x /= sum;
  return z;
}

std::vector<double> affine(const Matrix& w, const std::vector<double>& b,
                           const std::vector<double>& x) {
  if (x.size() != w.rows) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) +
                          " does not match weight rows " + std::to_string(w.rows));
  }
  std::vector<double> z = b;
  for (std::size_t d = 0; d < w.rows; ++d) {
    const double xd = x[d];
    for (std::size_t c = 0; c < w.cols; ++c) {
      z[c] += xd * w.at(d, c);
    }
  }
  return z;
}

int argmax_index(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void add_freq_bias(std::vector<double>& logits, const FreqModel& fm, ClassId s,
                   ClassId o) {
  const std::vector<double> q = freq_predict(fm, s, o);
  const int p = fm.num_predicates;
  if (p != static_cast<int>(logits.size()) - 1) {
    throw ValidationError("freq bias predicate vocabulary does not match the edge head");
  }
  for (int r = 1; r <= p; ++r) {
    logits[r] += std::log(q[r]);
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(a) ^ b) ^ c);
}

}  // namespace

ClassifierModel init_model(std::size_t node_dim, std::size_t edge_dim, int c_obj,
                           int c_pred, std::uint64_t seed) {
  if (c_obj < 1 || c_pred < 1) {
    throw ValidationError("init_model: vocabulary sizes must be >= 1");
  }
  ClassifierModel m;
  m.rng_seed = seed;
  m.node_w = Matrix(node_dim, static_cast<std::size_t>(c_obj));
  m.node_b.assign(static_cast<std::size_t>(c_obj), 0.0);
  m.edge_w = Matrix(edge_dim, static_cast<std::size_t>(c_pred) + 1);
  m.edge_b.assign(static_cast<std::size_t>(c_pred) + 1, 0.0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (double& x : m.node_w.data) x = u(rng);
  for (double& x : m.edge_w.data) x = u(rng);
  return m;
}

Prediction forward(const ClassifierModel& model, const SceneGraph& graph,
                   const FeatureBundle& feats, Task task) {
  const int n = static_cast<int>(graph.node_count());
  if (feats.node_features.size() != graph.node_count()) {
    throw ValidationError("forward: node feature count does not match the graph");
  }

  Prediction pred;
  pred.graph_id = graph.graph_id;
  pred.node_probs.resize(graph.node_count());

  const int c_obj = model.num_object_classes();
  std::vector<ClassId> pair_classes(graph.node_count());
  for (int i = 0; i < n; ++i) {
    if (task == Task::PredCls) {
      if (graph.nodes[i] >= c_obj) {
        throw ValidationError("forward: object class id outside the model vocabulary");
      }
      std::vector<double> one_hot(static_cast<std::size_t>(c_obj), 0.0);
      one_hot[graph.nodes[i]] = 1.0;
      pred.node_probs[i] = std::move(one_hot);
      pair_classes[i] = graph.nodes[i];
    } else {
      pred.node_probs[i] = softmax(affine(model.node_w, model.node_b,
                                          feats.node_features[i]));
      pair_classes[i] = argmax_index(pred.node_probs[i]);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto it = feats.edge_features.find({i, j});
      if (it == feats.edge_features.end()) {
        throw ValidationError("forward: missing edge feature for pair (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      std::vector<double> z = affine(model.edge_w, model.edge_b, it->second);
      if (model.freq_bias) {
        add_freq_bias(z, *model.freq_bias, pair_classes[i], pair_classes[j]);
      }
      pred.pair_probs[{i, j}] = softmax(std::move(z));
    }
  }
  return pred;
}

SampledEdges sample_edges(const Batch& batch, std::size_t max_fg, std::size_t max_bg,
                          std::uint64_t seed) {
  if (max_fg < 1 || max_bg < 1) {
    throw ValidationError("sample_edges: caps must be >= 1");
  }
  std::vector<EdgeKey> all_fg;
  std::vector<EdgeKey> all_bg;
  for (int gi = 0; gi < static_cast<int>(batch.graphs.size()); ++gi) {
    const SceneGraph& g = batch.graphs[gi];
    for (const FgEdge& e : g.fg_edges) {
      all_fg.push_back({gi, e.subject, e.object});
    }
    for (const auto& [i, j] : enumerate_bg_pairs(g)) {
      all_bg.push_back({gi, i, j});
    }
  }

  std::mt19937_64 rng(seed);
  SampledEdges out;
  if (all_fg.size() <= max_fg) {
    out.fg = std::move(all_fg);
  } else {
    std::sample(all_fg.begin(), all_fg.end(), std::back_inserter(out.fg), max_fg, rng);
  }
  if (all_bg.size() <= max_bg) {
    out.bg = std::move(all_bg);
  } else {
    std::sample(all_bg.begin(), all_bg.end(), std::back_inserter(out.bg), max_bg, rng);
  }
  return out;
}

namespace {

struct GraphContext {
  std::vector<ClassId> pair_classes;  // GT labels (PredCls) or argmax predictions
  std::map<std::pair<int, int>, PredicateId> fg_label;
};

// Node softmax pass: fills ctx, adds the node CE sum and gradients (SGCls).
double node_pass(const ClassifierModel& model, const Batch& batch,
                 const std::vector<FeatureBundle>& feats, Task task,
                 std::vector<GraphContext>& ctx, Gradients* grads) {
  double node_ce_sum = 0.0;
  const double node_coeff =
      batch.n_total > 0 ? 1.0 / static_cast<double>(batch.n_total) : 0.0;
  for (std::size_t gi = 0; gi < batch.graphs.size(); ++gi) {
    const SceneGraph& g = batch.graphs[gi];
    GraphContext& c = ctx[gi];
    c.pair_classes.resize(g.node_count());
    for (const FgEdge& e : g.fg_edges) {
      c.fg_label[{e.subject, e.object}] = e.predicate;
    }
    if (feats[gi].node_features.size() != g.node_count()) {
      throw ValidationError("loss_and_gradients: node feature count mismatch in graph " +
                            std::to_string(gi));
    }
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (task == Task::PredCls) {
        c.pair_classes[i] = g.nodes[i];
        continue;
      }
      const std::vector<double>& x = feats[gi].node_features[i];
      const std::vector<double> p = softmax(affine(model.node_w, model.node_b, x));
      const ClassId y = g.nodes[i];
      if (y >= static_cast<ClassId>(p.size())) {
        throw ValidationError("loss_and_gradients: object class outside the model vocabulary");
      }
      node_ce_sum += -std::log(p[y]);
      c.pair_classes[i] = argmax_index(p);
      if (grads) {
        for (std::size_t cc = 0; cc < p.size(); ++cc) {
          const double dz = (p[cc] - (static_cast<ClassId>(cc) == y ? 1.0 : 0.0)) * node_coeff;
          grads->node_b[cc] += dz;
          for (std::size_t d = 0; d < x.size(); ++d) {
            grads->node_w.at(d, cc) += x[d] * dz;
          }
        }
      }
    }
  }
  return node_ce_sum;
}

}  // namespace

std::pair<LossValue, Gradients> loss_and_gradients(
    const ClassifierModel& model, const Batch& batch,
    const std::vector<FeatureBundle>& feats, const LossConfig& cfg, Task task,
    const SampledEdges* sample) {
  validate_loss_config(cfg);
  if (feats.size() != batch.graphs.size()) {
    throw ValidationError("loss_and_gradients: one FeatureBundle per graph required");
  }

  std::vector<EdgeKey> fg_keys;
  std::vector<EdgeKey> bg_keys;
  if (sample) {
    fg_keys = sample->fg;
    bg_keys = sample->bg;
  } else {
    for (int gi = 0; gi < static_cast<int>(batch.graphs.size()); ++gi) {
      const SceneGraph& g = batch.graphs[gi];
      for (const FgEdge& e : g.fg_edges) fg_keys.push_back({gi, e.subject, e.object});
      for (const auto& [i, j] : enumerate_bg_pairs(g)) bg_keys.push_back({gi, i, j});
    }
  }
  if (fg_keys.empty()) {
    throw DegenerateBatchError("loss_and_gradients: batch has no FG edges");
  }

  Gradients grads;
  grads.node_w = Matrix(model.node_w.rows, model.node_w.cols);
  grads.node_b.assign(model.node_b.size(), 0.0);
  grads.edge_w = Matrix(model.edge_w.rows, model.edge_w.cols);
  grads.edge_b.assign(model.edge_b.size(), 0.0);

  std::vector<GraphContext> ctx(batch.graphs.size());
  const double node_ce_sum = node_pass(model, batch, feats, task, ctx, &grads);
  const double l_node =
      task == Task::SGCls ? node_ce_sum / static_cast<double>(batch.n_total) : 0.0;

  const GroupWeights w = group_edge_weights(fg_keys.size(), bg_keys.size(), cfg);

  double fg_ce_sum = 0.0;
  double bg_ce_sum = 0.0;
  auto process_edge = [&](const EdgeKey& key, PredicateId label, double weight,
                          double& ce_sum) {
    auto it = feats[key.graph].edge_features.find({key.subject, key.object});
    if (it == feats[key.graph].edge_features.end()) {
      throw ValidationError("loss_and_gradients: missing edge feature in graph " +
                            std::to_string(key.graph));
    }
    const std::vector<double>& x = it->second;
    std::vector<double> z = affine(model.edge_w, model.edge_b, x);
    if (model.freq_bias) {
      const GraphContext& c = ctx[key.graph];
      add_freq_bias(z, *model.freq_bias, c.pair_classes[key.subject],
                    c.pair_classes[key.object]);
    }
    const std::vector<double> p = softmax(std::move(z));
    ce_sum += -std::log(p[label]);
    for (std::size_t cc = 0; cc < p.size(); ++cc) {
      const double dz = (p[cc] - (static_cast<PredicateId>(cc) == label ? 1.0 : 0.0)) * weight;
      grads.edge_b[cc] += dz;
      for (std::size_t d = 0; d < x.size(); ++d) {
        grads.edge_w.at(d, cc) += x[d] * dz;
      }
    }
  };

  for (const EdgeKey& key : fg_keys) {
    const auto& labels = ctx[key.graph].fg_label;
    auto it = labels.find({key.subject, key.object});
    if (it == labels.end()) {
      throw ValidationError("loss_and_gradients: sampled FG key is not an FG edge");
    }
    process_edge(key, it->second, w.fg, fg_ce_sum);
  }
  for (const EdgeKey& key : bg_keys) {
    process_edge(key, 0, w.bg, bg_ce_sum);
  }

  EdgeLossTerms terms;
  terms.m_fg = fg_keys.size();
  terms.m_bg = bg_keys.size();
  terms.l_fg = fg_ce_sum / static_cast<double>(terms.m_fg);
  terms.l_bg = terms.m_bg > 0 ? bg_ce_sum / static_cast<double>(terms.m_bg) : 0.0;

  return {compute_loss(l_node, terms, cfg), std::move(grads)};
}

ClassifierModel sgd_step(ClassifierModel model, const Gradients& grads,
                         double learning_rate) {
  if (grads.node_w.data.size() != model.node_w.data.size() ||
      grads.node_b.size() != model.node_b.size() ||
      grads.edge_w.data.size() != model.edge_w.data.size() ||
      grads.edge_b.size() != model.edge_b.size()) {
    throw ValidationError("sgd_step: gradient shapes do not match the model");
  }
  auto apply = [&](std::vector<double>& param, const std::vector<double>& g) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw ValidationError("sgd_step: non-finite gradient");
      }
      param[i] -= learning_rate * g[i];
    }
  };
  apply(model.node_w.data, grads.node_w.data);
  apply(model.node_b, grads.node_b);
  apply(model.edge_w.data, grads.edge_w.data);
  apply(model.edge_b, grads.edge_b);
  return model;
}

namespace {

struct NodeOnly {
  double l_node = 0.0;
  Gradients grads;
};

// Fallback for batches without FG edges: node term only.
NodeOnly node_only_loss(const ClassifierModel& model, const Batch& batch,
                        const std::vector<FeatureBundle>& feats, Task task) {
  NodeOnly out;
  out.grads.node_w = Matrix(model.node_w.rows, model.node_w.cols);
  out.grads.node_b.assign(model.node_b.size(), 0.0);
  out.grads.edge_w = Matrix(model.edge_w.rows, model.edge_w.cols);
  out.grads.edge_b.assign(model.edge_b.size(), 0.0);
  std::vector<GraphContext> ctx(batch.graphs.size());
  const double sum = node_pass(model, batch, feats, task, ctx, &out.grads);
  out.l_node = task == Task::SGCls && batch.n_total > 0
                   ? sum / static_cast<double>(batch.n_total)
                   : 0.0;
  return out;
}

double fg_accuracy(const ClassifierModel& model, const std::vector<SceneGraph>& graphs,
                   const std::vector<FeatureBundle>& feats, Task task) {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Prediction pred = forward(model, graphs[i], feats[i], task);
    for (const FgEdge& e : graphs[i].fg_edges) {
      const std::vector<double>& p = pred.pair_probs.at({e.subject, e.object});
      int best = 1;
      for (int r = 2; r < static_cast<int>(p.size()); ++r) {
        if (p[r] > p[best]) best = r;
      }
      ++total;
      if (best == e.predicate) ++hits;
    }
  }
  return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

double node_accuracy(const ClassifierModel& model, const std::vector<SceneGraph>& graphs,
                     const std::vector<FeatureBundle>& feats) {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Prediction pred = forward(model, graphs[i], feats[i], Task::SGCls);
    for (std::size_t v = 0; v < graphs[i].node_count(); ++v) {
      ++total;
      if (argmax_index(pred.node_probs[v]) == graphs[i].nodes[v]) ++hits;
    }
  }
  return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

}  // namespace

TrainResult train(const std::vector<SceneGraph>& graphs,
                  const std::vector<FeatureBundle>& features, const TrainConfig& cfg,
                  const std::vector<SceneGraph>* val_graphs,
                  const std::vector<FeatureBundle>* val_features) {
  if (graphs.empty()) throw DegenerateInputError("train: empty training set");
  if (graphs.size() != features.size()) {
    throw ValidationError("train: one FeatureBundle per graph required");
  }
  if (cfg.learning_rate <= 0 || cfg.epochs < 0 || cfg.batch_size < 1) {
    throw ValidationError("train: hyperparameters must be positive");
  }
  validate_loss_config(cfg.loss);
  if ((val_graphs == nullptr) != (val_features == nullptr)) {
    throw ValidationError("train: validation graphs and features must come together");
  }

  int c_obj = cfg.num_object_classes;
  int c_pred = cfg.num_predicates;
  for (const SceneGraph& g : graphs) {
    if (cfg.num_object_classes == 0) {
      for (ClassId c : g.nodes) c_obj = std::max(c_obj, c + 1);
    }
    if (cfg.num_predicates == 0) {
      for (const FgEdge& e : g.fg_edges) c_pred = std::max(c_pred, e.predicate);
    }
  }
  if (c_obj < 1 || c_pred < 1) {
    throw ValidationError("train: could not infer a nonempty vocabulary");
  }

  const std::size_t node_dim = features[0].node_features.empty()
                                   ? 0
                                   : features[0].node_features[0].size();
  std::size_t edge_dim = 0;
  for (const FeatureBundle& f : features) {
    if (!f.edge_features.empty()) {
      edge_dim = f.edge_features.begin()->second.size();
      break;
    }
  }

  ClassifierModel model = init_model(node_dim, edge_dim, c_obj, c_pred, cfg.seed);
  if (cfg.freq_bias) {
    model.freq_bias = fit_freq(graphs, cfg.freq_smoothing, c_pred);
  }

  TrainResult result;
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x5fa11e5ULL, 0));
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochStats stats;
    stats.epoch = epoch;
    std::size_t loss_batches = 0;
    double sum_node = 0, sum_fg = 0, sum_bg = 0, sum_d = 0, sum_mfg = 0, sum_mbg = 0;

    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<SceneGraph> batch_graphs;
      std::vector<FeatureBundle> batch_feats;
      for (std::size_t i = start; i < end; ++i) {
        batch_graphs.push_back(graphs[order[i]]);
        batch_feats.push_back(features[order[i]]);
      }
      const Batch batch = make_batch(std::move(batch_graphs));

      SampledEdges sampled;
      const SampledEdges* sample_ptr = nullptr;
      if (cfg.edge_sampling) {
        sampled = sample_edges(batch, cfg.edge_sampling->first, cfg.edge_sampling->second,
                               mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                                        static_cast<std::uint64_t>(batch_index)));
        sample_ptr = &sampled;
      }

      try {
        auto [loss, grads] =
            loss_and_gradients(model, batch, batch_feats, cfg.loss, cfg.task, sample_ptr);
        model = sgd_step(std::move(model), grads, cfg.learning_rate);
        sum_node += loss.l_node;
        sum_fg += loss.edge.l_fg;
        sum_bg += loss.edge.l_bg;
        sum_d += loss.edge.density();
        sum_mfg += static_cast<double>(loss.edge.m_fg);
        sum_mbg += static_cast<double>(loss.edge.m_bg);
        ++loss_batches;
      } catch (const DegenerateBatchError&) {
        if (!cfg.skip_degenerate) throw;
        ++stats.degenerate_batches;
        if (cfg.task == Task::SGCls) {
          NodeOnly fallback = node_only_loss(model, batch, batch_feats, cfg.task);
          model = sgd_step(std::move(model), fallback.grads, cfg.learning_rate);
        }
      }
    }

    if (loss_batches > 0) {
      const double nb = static_cast<double>(loss_batches);
      stats.l_node = sum_node / nb;
      stats.l_fg = sum_fg / nb;
      stats.l_bg = sum_bg / nb;
      stats.density = sum_d / nb;
      stats.sampled_fg = sum_mfg / nb;
      stats.sampled_bg = sum_mbg / nb;
    }
    if (val_graphs) {
      if (cfg.task == Task::SGCls) {
        stats.val_node_accuracy = node_accuracy(model, *val_graphs, *val_features);
      }
      stats.val_fg_accuracy = fg_accuracy(model, *val_graphs, *val_features, cfg.task);
    }
    result.history.push_back(stats);
  }

  result.model = std::move(model);
  return result;
}

namespace {

double* parameter_at(ClassifierModel& m, std::size_t idx) {
  if (idx < m.node_w.data.size()) return &m.node_w.data[idx];
  idx -= m.node_w.data.size();
  if (idx < m.node_b.size()) return &m.node_b[idx];
  idx -= m.node_b.size();
  if (idx < m.edge_w.data.size()) return &m.edge_w.data[idx];
  idx -= m.edge_w.data.size();
  return &m.edge_b[idx];
}

double gradient_at(const Gradients& g, std::size_t idx) {
  if (idx < g.node_w.data.size()) return g.node_w.data[idx];
  idx -= g.node_w.data.size();
  if (idx < g.node_b.size()) return g.node_b[idx];
  idx -= g.node_b.size();
  if (idx < g.edge_w.data.size()) return g.edge_w.data[idx];
  idx -= g.edge_w.data.size();
  return g.edge_b[idx];
}

}  // namespace

double grad_check_against(const ClassifierModel& model, const Batch& batch,
                          const std::vector<FeatureBundle>& feats,
                          const LossConfig& cfg, Task task, double epsilon,
                          const Gradients& claimed, std::size_t max_params,
                          std::uint64_t subset_seed) {
  if (epsilon <= 0) throw ValidationError("grad_check: epsilon must be > 0");
  const std::size_t total = model.parameter_count();
  if (total == 0) return 0.0;  // vacuous

  std::vector<std::size_t> indices(total);
  std::iota(indices.begin(), indices.end(), 0);
  if (total > max_params) {
    std::vector<std::size_t> subset;
    std::mt19937_64 rng(subset_seed);
    std::sample(indices.begin(), indices.end(), std::back_inserter(subset), max_params, rng);
    indices = std::move(subset);
  }

  auto eval = [&](const ClassifierModel& m) {
    return loss_and_gradients(m, batch, feats, cfg, task).first.total;
  };

  double max_err = 0.0;
  ClassifierModel probe = model;
  for (std::size_t idx : indices) {
    double* slot = parameter_at(probe, idx);
    const double saved = *slot;
    *slot = saved + epsilon;
    const double f_plus = eval(probe);
    *slot = saved - epsilon;
    const double f_minus = eval(probe);
    *slot = saved;

    const double fd = (f_plus - f_minus) / (2.0 * epsilon);
    const double a = gradient_at(claimed, idx);
    const double scale = std::max(std::abs(a), std::abs(fd));
    if (scale < 1e-7) continue;  // both effectively zero
    max_err = std::max(max_err, std::abs(a - fd) / scale);
  }
  return max_err;
}

double grad_check(const ClassifierModel& model, const Batch& batch,
                  const std::vector<FeatureBundle>& feats, const LossConfig& cfg,
                  Task task, double epsilon, std::size_t max_params,
                  std::uint64_t subset_seed) {
  const Gradients grads = loss_and_gradients(model, batch, feats, cfg, task).second;
  return grad_check_against(model, batch, feats, cfg, task, epsilon, grads, max_params,
                            subset_seed);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t cols_hint) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows > 0 ? j.at(0).size() : cols_hint;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw IoError("checkpoint: ragged weight matrix");
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const ClassifierModel& model, Task task,
                     const std::string& config_echo_json) {
  nlohmann::json j;
  j["version"] = 1;
  j["task"] = to_string(task);
  j["rng_seed"] = model.rng_seed;
  j["node_w"] = matrix_to_json(model.node_w);
  j["node_b"] = model.node_b;
  j["edge_w"] = matrix_to_json(model.edge_w);
  j["edge_b"] = model.edge_b;
  j["freq_bias"] = model.freq_bias
                       ? nlohmann::json::parse(freq_to_json(*model.freq_bias))
                       : nlohmann::json(nullptr);
  j["config"] = nlohmann::json::parse(config_echo_json);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  Checkpoint ck;
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("version").get<int>() != 1) {
      throw IoError("unsupported checkpoint version");
    }
    ck.task = task_from_string(j.at("task").get<std::string>());
    ck.model.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    ck.model.node_b = j.at("node_b").get<std::vector<double>>();
    ck.model.edge_b = j.at("edge_b").get<std::vector<double>>();
    ck.model.node_w = matrix_from_json(j.at("node_w"), ck.model.node_b.size());
    ck.model.edge_w = matrix_from_json(j.at("edge_w"), ck.model.edge_b.size());
    if (!j.at("freq_bias").is_null()) {
      ck.model.freq_bias = freq_from_json(j.at("freq_bias").dump());
    }
    ck.config_echo = j.value("config", nlohmann::json::object()).dump();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint '" + path + "': " + e.what());
  }
  return ck;
}

void write_features_jsonl(const std::string& path,
                          const std::vector<SceneGraph>& graphs,
                          const std::vector<FeatureBundle>& features) {
  if (graphs.size() != features.size()) {
    throw ValidationError("write_features_jsonl: one FeatureBundle per graph required");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    nlohmann::json j;
    j["graph_id"] = graphs[i].graph_id;
    j["node_features"] = features[i].node_features;
    auto edges = nlohmann::json::array();
    for (const auto& [pair, f] : features[i].edge_features) {
      edges.push_back({{"s", pair.first}, {"o", pair.second}, {"f", f}});
    }
    j["edge_features"] = std::move(edges);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::string, FeatureBundle>> read_features_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file: " + path);
  std::vector<std::pair<std::string, FeatureBundle>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      FeatureBundle fb;
      fb.node_features = j.at("node_features").get<std::vector<std::vector<double>>>();
      for (const auto& e : j.at("edge_features")) {
        fb.edge_features[{e.at("s").get<int>(), e.at("o").get<int>()}] =
            e.at("f").get<std::vector<double>>();
      }
      out.emplace_back(j.at("graph_id").get<std::string>(), std::move(fb));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<FeatureBundle> align_features(
    const std::vector<SceneGraph>& graphs,
    std::vector<std::pair<std::string, FeatureBundle>> features) {
  std::map<std::string, FeatureBundle> by_id;
  for (auto& [id, fb] : features) {
    if (!by_id.emplace(id, std::move(fb)).second) {
      throw ValidationError("align_features: duplicate feature entry for '" + id + "'");
    }
  }
  std::vector<FeatureBundle> out;
  out.reserve(graphs.size());
  for (const SceneGraph& g : graphs) {
    auto it = by_id.find(g.graph_id);
    if (it == by_id.end()) {
      throw ValidationError("align_features: no features for graph '" + g.graph_id + "'");
    }
    out.push_back(std::move(it->second));
  }
  return out;
}

}  // namespace sgg
