#include "sgg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace sgg {

namespace {

int argmax_index(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;  // ties keep the lower index
  }
  return best;
}

void check_aligned(const std::vector<Prediction>& preds,
                   const std::vector<SceneGraph>& graphs) {
  if (preds.size() != graphs.size()) {
    throw ValidationError("predictions/graphs size mismatch");
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].graph_id != graphs[i].graph_id) {
      throw ValidationError("graph_id mismatch at index " + std::to_string(i) + ": '" +
                            preds[i].graph_id + "' vs '" + graphs[i].graph_id + "'");
    }
  }
}

const std::vector<double>& pair_dist(const Prediction& pred, int i, int j) {
  auto it = pred.pair_probs.find({i, j});
  if (it == pred.pair_probs.end()) {
    throw ValidationError("prediction '" + pred.graph_id + "': missing distribution for pair (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  return it->second;
}

}  // namespace

void validate_prediction(const Prediction& pred, const SceneGraph& graph) {
  const std::size_t n = graph.node_count();
  if (pred.graph_id != graph.graph_id) {
    throw ValidationError("prediction/graph id mismatch: '" + pred.graph_id + "' vs '" +
                          graph.graph_id + "'");
  }
  if (pred.node_probs.size() != n) {
    throw ValidationError("prediction '" + pred.graph_id + "': node_probs size != N");
  }
  auto check_dist = [&](const std::vector<double>& p, const char* what) {
    double sum = 0.0;
    for (double x : p) {
      if (x < 0.0) throw ValidationError("prediction '" + pred.graph_id + "': negative " +
                                         std::string(what) + " probability");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError("prediction '" + pred.graph_id + "': " + what +
                            " distribution does not sum to 1");
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(graph.nodes[i]) >= pred.node_probs[i].size()) {
      throw ValidationError("prediction '" + pred.graph_id +
                            "': node distribution shorter than the class vocabulary");
    }
    check_dist(pred.node_probs[i], "node");
  }
  if (pred.pair_probs.size() != graph.pair_count()) {
    throw ValidationError("prediction '" + pred.graph_id + "': expected " +
                          std::to_string(graph.pair_count()) + " pair distributions, got " +
                          std::to_string(pred.pair_probs.size()));
  }
  for (const auto& [pair, dist] : pred.pair_probs) {
    if (pair.first < 0 || pair.second < 0 || pair.first >= static_cast<int>(n) ||
        pair.second >= static_cast<int>(n) || pair.first == pair.second) {
      throw ValidationError("prediction '" + pred.graph_id + "': invalid pair key");
    }
    if (dist.size() < 2) {
      throw ValidationError("prediction '" + pred.graph_id +
                            "': pair distribution needs BG plus at least one predicate");
    }
    check_dist(dist, "pair");
  }
}

std::vector<GtTriplet> gt_triplets(const SceneGraph& graph) {
  std::vector<GtTriplet> out;
  out.reserve(graph.fg_edges.size());
  for (const FgEdge& e : graph.fg_edges) {
    out.push_back({e.subject, e.object, graph.nodes[e.subject], e.predicate,
                   graph.nodes[e.object]});
  }
  return out;
}

std::vector<RankedTriplet> rank_triplets(const Prediction& pred,
                                         const SceneGraph& graph,
                                         bool constrained, Task task) {
  const int n = static_cast<int>(graph.node_count());
  std::vector<RankedTriplet> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::vector<double>& probs = pair_dist(pred, i, j);
      const int num_preds = static_cast<int>(probs.size()) - 1;

      ClassId s_class, o_class;
      double s_prob, o_prob;
      if (task == Task::PredCls) {
        s_class = graph.nodes[i];
        o_class = graph.nodes[j];
        s_prob = 1.0;
        o_prob = 1.0;
      } else {
        s_class = argmax_index(pred.node_probs[i]);
        o_class = argmax_index(pred.node_probs[j]);
        s_prob = pred.node_probs[i][s_class];
        o_prob = pred.node_probs[j][o_class];
      }

      auto emit = [&](PredicateId r) {
        out.push_back({i, j, s_class, r, o_class, (s_prob * probs[r]) * o_prob});
      };
      if (constrained) {
        int best = 1;
        for (int r = 2; r <= num_preds; ++r) {
          if (probs[r] > probs[best]) best = r;
        }
        emit(best);
      } else {
        for (int r = 1; r <= num_preds; ++r) emit(r);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const RankedTriplet& a, const RankedTriplet& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.subject_node != b.subject_node) return a.subject_node < b.subject_node;
    if (a.object_node != b.object_node) return a.object_node < b.object_node;
    return a.predicate < b.predicate;
  });
  return out;
}

namespace {

// Index in the ranked list of the candidate matching each GT triplet,
// or -1 when no candidate matches.
std::vector<std::ptrdiff_t> match_positions(const std::vector<RankedTriplet>& ranked,
                                            const std::vector<GtTriplet>& gt) {
  std::vector<std::ptrdiff_t> pos(gt.size(), -1);
  std::map<std::tuple<int, int, ClassId, PredicateId, ClassId>, std::size_t> lookup;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    lookup.emplace(std::make_tuple(gt[t].subject_node, gt[t].object_node,
                                   gt[t].subject_class, gt[t].predicate, gt[t].object_class),
                   t);
  }
  for (std::size_t c = 0; c < ranked.size(); ++c) {
    const RankedTriplet& r = ranked[c];
    auto it = lookup.find(std::make_tuple(r.subject_node, r.object_node, r.subject_class,
                                          r.predicate, r.object_class));
    if (it != lookup.end() && pos[it->second] < 0) {
      pos[it->second] = static_cast<std::ptrdiff_t>(c);
    }
  }
  return pos;
}

}  // namespace

double image_recall_at_k(const std::vector<RankedTriplet>& ranked,
                         const std::vector<GtTriplet>& gt, int k) {
  if (gt.empty()) {
    throw DegenerateInputError("image_recall_at_k: empty GT, skip this image");
  }
  if (k < 1) {
    throw ValidationError("image_recall_at_k: K must be >= 1");
  }
  const std::vector<std::ptrdiff_t> pos = match_positions(ranked, gt);
  std::size_t matched = 0;
  for (std::ptrdiff_t p : pos) {
    if (p >= 0 && p < static_cast<std::ptrdiff_t>(k)) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(gt.size());
}

std::vector<SceneGraph> n_shot_filter(const std::vector<SceneGraph>& graphs,
                                      const TripletCounts& counts, std::int64_t n) {
  if (n < 0) {
    throw ValidationError("n_shot_filter: n must be >= 0");
  }
  std::vector<SceneGraph> out;
  for (const SceneGraph& g : graphs) {
    SceneGraph kept;
    kept.graph_id = g.graph_id;
    kept.nodes = g.nodes;
    for (const FgEdge& e : g.fg_edges) {
      if (counts.count({g.nodes[e.subject], e.predicate, g.nodes[e.object]}) <= n) {
        kept.fg_edges.push_back(e);
      }
    }
    if (!kept.fg_edges.empty()) {
      out.push_back(std::move(kept));
    }
  }
  return out;
}

std::int64_t triplet_rank(const Prediction& pred, const SceneGraph& graph,
                          const FgEdge& edge, Task task) {
  const std::vector<double>& probs = pair_dist(pred, edge.subject, edge.object);
  const int num_preds = static_cast<int>(probs.size()) - 1;

  if (task == Task::PredCls) {
    const double gt_score = probs[edge.predicate];
    std::int64_t higher = 0;
    for (int r = 1; r <= num_preds; ++r) {
      if (probs[r] > gt_score) ++higher;
    }
    return 1 + higher;
  }

  const std::vector<double>& s_probs = pred.node_probs[edge.subject];
  const std::vector<double>& o_probs = pred.node_probs[edge.object];
  const double gt_score =
      (s_probs[graph.nodes[edge.subject]] * probs[edge.predicate]) *
      o_probs[graph.nodes[edge.object]];

  // Count candidates (s_class, r, o_class) with strictly higher product.
  // For fixed s_class and r the product is monotone in the object
  // probability, so a binary search over the sorted object probabilities
  // replaces the inner loop without changing any float comparison.
  std::vector<double> sorted_o = o_probs;
  std::sort(sorted_o.begin(), sorted_o.end());
  std::int64_t higher = 0;
  for (double sp : s_probs) {
    for (int r = 1; r <= num_preds; ++r) {
      const double base = sp * probs[r];
      auto it = std::partition_point(sorted_o.begin(), sorted_o.end(),
                                     [&](double op) { return !(base * op > gt_score); });
      higher += sorted_o.end() - it;
    }
  }
  return 1 + higher;
}

double triplet_recall(const std::vector<Prediction>& preds,
                      const std::vector<SceneGraph>& graphs, int k, Task task) {
  check_aligned(preds, graphs);
  if (k < 1) throw ValidationError("triplet_recall: K must be >= 1");
  std::int64_t hits = 0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (const FgEdge& e : graphs[i].fg_edges) {
      ++total;
      if (triplet_rank(preds[i], graphs[i], e, task) <= k) ++hits;
    }
  }
  if (total == 0) {
    throw DegenerateInputError("triplet_recall: no GT triplets in the test set");
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double weighted_triplet_recall(const std::vector<Prediction>& preds,
                               const std::vector<SceneGraph>& graphs,
                               const TripletCounts& counts, int k, Task task) {
  check_aligned(preds, graphs);
  if (k < 1) throw ValidationError("weighted_triplet_recall: K must be >= 1");
  double hit_weight = 0.0;
  double normalizer = 0.0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const SceneGraph& g = graphs[i];
    for (const FgEdge& e : g.fg_edges) {
      ++total;
      const std::int64_t n_t = counts.count({g.nodes[e.subject], e.predicate, g.nodes[e.object]});
      const double w = 1.0 / static_cast<double>(n_t + 1);
      normalizer += w;
      if (triplet_rank(preds[i], g, e, task) <= k) hit_weight += w;
    }
  }
  if (total == 0) {
    throw DegenerateInputError("weighted_triplet_recall: no GT triplets in the test set");
  }
  return hit_weight / normalizer;
}

double mean_recall(const std::vector<Prediction>& preds,
                   const std::vector<SceneGraph>& graphs, int k,
                   bool constrained, Task task) {
  check_aligned(preds, graphs);
  if (k < 1) throw ValidationError("mean_recall: K must be >= 1");
  std::map<PredicateId, std::pair<std::int64_t, std::int64_t>> per_class;  // hit, total
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const std::vector<GtTriplet> gt = gt_triplets(graphs[i]);
    if (gt.empty()) continue;
    const std::vector<RankedTriplet> ranked = rank_triplets(preds[i], graphs[i], constrained, task);
    const std::vector<std::ptrdiff_t> pos = match_positions(ranked, gt);
    for (std::size_t t = 0; t < gt.size(); ++t) {
      auto& [hit, total] = per_class[gt[t].predicate];
      ++total;
      if (pos[t] >= 0 && pos[t] < static_cast<std::ptrdiff_t>(k)) ++hit;
    }
  }
  if (per_class.empty()) {
    throw DegenerateInputError("mean_recall: no GT triplets in the test set");
  }
  double sum = 0.0;
  for (const auto& [cls, counts] : per_class) {
    sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return sum / static_cast<double>(per_class.size());
}

const MetricRow* MetricReport::find(const std::string& metric, int k,
                                    const std::string& variant) const {
  for (const MetricRow& r : rows) {
    if (r.metric == metric && r.k == k && r.variant == variant) return &r;
  }
  return nullptr;
}

double MetricReport::value_of(const std::string& metric, int k,
                              const std::string& variant) const {
  const MetricRow* r = find(metric, k, variant);
  if (!r) {
    throw ValidationError("metric not in report: " + metric + "@" + std::to_string(k) +
                          " (" + variant + ")");
  }
  return r->value;
}

namespace {

std::string nshot_metric_name(std::int64_t n) {
  return n == 0 ? "R_ZS" : "R_NS" + std::to_string(n);
}

}  // namespace

MetricReport recall_suite(const std::vector<Prediction>& preds,
                          const std::vector<SceneGraph>& graphs,
                          const TripletCounts& counts, const SuiteOptions& options) {
  if (preds.size() != graphs.size()) {
    throw ValidationError("recall_suite: predictions/graphs size mismatch");
  }

  // Fixed reduction order by graph_id.
  std::vector<std::size_t> order(graphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return graphs[a].graph_id < graphs[b].graph_id;
  });
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : preds) {
    if (!by_id.emplace(p.graph_id, &p).second) {
      throw ValidationError("recall_suite: duplicate prediction for '" + p.graph_id + "'");
    }
  }

  std::vector<const SceneGraph*> gs;
  std::vector<const Prediction*> ps;
  for (std::size_t idx : order) {
    const SceneGraph& g = graphs[idx];
    auto it = by_id.find(g.graph_id);
    if (it == by_id.end()) {
      throw ValidationError("recall_suite: no prediction for graph '" + g.graph_id + "'");
    }
    validate_prediction(*it->second, g);
    gs.push_back(&g);
    ps.push_back(it->second);
  }

  MetricReport report;
  std::vector<bool> variants{false};
  if (options.constrained_variant) variants.push_back(true);

  for (bool constrained : variants) {
    const std::string variant = constrained ? "constrained" : "unconstrained";

    // Per image: GT list and match position of each GT triplet.
    std::vector<std::vector<GtTriplet>> all_gt(gs.size());
    std::vector<std::vector<std::ptrdiff_t>> all_pos(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
      all_gt[i] = gt_triplets(*gs[i]);
      if (all_gt[i].empty()) continue;
      all_pos[i] = match_positions(rank_triplets(*ps[i], *gs[i], constrained, options.task),
                                   all_gt[i]);
    }

    for (int k : options.ks) {
      // R@K over all images with GT.
      {
        double sum = 0.0;
        std::size_t images = 0;
        for (std::size_t i = 0; i < gs.size(); ++i) {
          if (all_gt[i].empty()) continue;
          std::size_t hit = 0;
          for (std::size_t t = 0; t < all_gt[i].size(); ++t) {
            if (all_pos[i][t] >= 0 && all_pos[i][t] < static_cast<std::ptrdiff_t>(k)) ++hit;
          }
          sum += static_cast<double>(hit) / static_cast<double>(all_gt[i].size());
          ++images;
        }
        report.rows.push_back({"R", k, variant, images ? sum / static_cast<double>(images) : 0.0,
                               images});
      }

      // n-shot restrictions of the GT.
      for (std::int64_t n : options.nshots) {
        double sum = 0.0;
        std::size_t images = 0;
        for (std::size_t i = 0; i < gs.size(); ++i) {
          std::size_t total = 0, hit = 0;
          for (std::size_t t = 0; t < all_gt[i].size(); ++t) {
            const GtTriplet& g = all_gt[i][t];
            if (counts.count({g.subject_class, g.predicate, g.object_class}) > n) continue;
            ++total;
            if (all_pos[i][t] >= 0 && all_pos[i][t] < static_cast<std::ptrdiff_t>(k)) ++hit;
          }
          if (total == 0) continue;  // image removed by the filter
          sum += static_cast<double>(hit) / static_cast<double>(total);
          ++images;
        }
        report.rows.push_back({nshot_metric_name(n), k, variant,
                               images ? sum / static_cast<double>(images) : 0.0, images});
      }

      // mR@K: dataset-pooled per-class recall, macro-averaged.
      {
        std::map<PredicateId, std::pair<std::int64_t, std::int64_t>> per_class;
        for (std::size_t i = 0; i < gs.size(); ++i) {
          for (std::size_t t = 0; t < all_gt[i].size(); ++t) {
            auto& [hit, total] = per_class[all_gt[i][t].predicate];
            ++total;
            if (all_pos[i][t] >= 0 && all_pos[i][t] < static_cast<std::ptrdiff_t>(k)) ++hit;
          }
        }
        double sum = 0.0;
        for (const auto& [cls, ht] : per_class) {
          sum += static_cast<double>(ht.first) / static_cast<double>(ht.second);
        }
        report.rows.push_back({"mR", k, variant,
                               per_class.empty() ? 0.0
                                                 : sum / static_cast<double>(per_class.size()),
                               per_class.size()});
      }
    }
  }

  // Triplet-level metrics are constraint-free.
  std::vector<std::vector<std::int64_t>> ranks(gs.size());
  std::size_t total_triplets = 0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    for (const FgEdge& e : gs[i]->fg_edges) {
      ranks[i].push_back(triplet_rank(*ps[i], *gs[i], e, options.task));
      ++total_triplets;
    }
  }
  for (int k : options.ks) {
    std::int64_t hits = 0;
    double hit_weight = 0.0, normalizer = 0.0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const SceneGraph& g = *gs[i];
      for (std::size_t t = 0; t < g.fg_edges.size(); ++t) {
        const FgEdge& e = g.fg_edges[t];
        const std::int64_t n_t =
            counts.count({g.nodes[e.subject], e.predicate, g.nodes[e.object]});
        const double w = 1.0 / static_cast<double>(n_t + 1);
        normalizer += w;
        if (ranks[i][t] <= k) {
          ++hits;
          hit_weight += w;
        }
      }
    }
    const double r_tr =
        total_triplets ? static_cast<double>(hits) / static_cast<double>(total_triplets) : 0.0;
    const double wr_tr = normalizer > 0.0 ? hit_weight / normalizer : 0.0;
    report.rows.push_back({"R_tr", k, "-", r_tr, total_triplets});
    report.rows.push_back({"wR_tr", k, "-", wr_tr, total_triplets});
  }

  return report;
}

Prediction freq_baseline_prediction(const FreqModel& model, const SceneGraph& graph,
                                    int c_obj) {
  Prediction p;
  p.graph_id = graph.graph_id;
  for (ClassId c : graph.nodes) {
    if (c >= c_obj) {
      throw ValidationError("freq_baseline_prediction: class id outside c_obj");
    }
    std::vector<double> one_hot(static_cast<std::size_t>(c_obj), 0.0);
    one_hot[c] = 1.0;
    p.node_probs.push_back(std::move(one_hot));
  }
  const int n = static_cast<int>(graph.node_count());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        p.pair_probs[{i, j}] = freq_predict(model, graph.nodes[i], graph.nodes[j]);
      }
    }
  }
  return p;
}

std::vector<Prediction> read_predictions_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction file: " + path);
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Prediction p;
      p.graph_id = j.at("graph_id").get<std::string>();
      p.node_probs = j.at("node_probs").get<std::vector<std::vector<double>>>();
      for (const auto& e : j.at("pair_probs")) {
        p.pair_probs[{e.at("s").get<int>(), e.at("o").get<int>()}] =
            e.at("probs").get<std::vector<double>>();
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions_jsonl(const std::string& path, const std::vector<Prediction>& preds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const Prediction& p : preds) {
    nlohmann::json j;
    j["graph_id"] = p.graph_id;
    j["node_probs"] = p.node_probs;
    auto pairs = nlohmann::json::array();
    for (const auto& [key, dist] : p.pair_probs) {
      pairs.push_back({{"s", key.first}, {"o", key.second}, {"probs", dist}});
    }
    j["pair_probs"] = std::move(pairs);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

std::string report_to_csv(const MetricReport& report) {
  std::ostringstream ss;
  ss << "metric,K,variant,value,count\n";
  for (const MetricRow& r : report.rows) {
    ss << r.metric << ',' << r.k << ',' << r.variant << ',' << format_double(r.value) << ','
       << r.count << '\n';
  }
  return ss.str();
}

std::string report_to_json(const MetricReport& report) {
  auto rows = nlohmann::json::array();
  for (const MetricRow& r : report.rows) {
    rows.push_back({{"metric", r.metric},
                    {"K", r.k},
                    {"variant", r.variant},
                    {"value", r.value},
                    {"count", r.count}});
  }
  return nlohmann::json{{"rows", rows}}.dump(2);
}

MetricReport report_from_csv(const std::string& text) {
  MetricReport report;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "metric,K,variant,value,count") {
    throw IoError("report_from_csv: bad header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    MetricRow r;
    std::string k, value, count;
    if (!std::getline(ls, r.metric, ',') || !std::getline(ls, k, ',') ||
        !std::getline(ls, r.variant, ',') || !std::getline(ls, value, ',') ||
        !std::getline(ls, count)) {
      throw IoError("report_from_csv: bad row at line " + std::to_string(lineno));
    }
    try {
      r.k = std::stoi(k);
      r.value = std::stod(value);
      r.count = static_cast<std::size_t>(std::stoull(count));
    } catch (const std::exception&) {
      throw IoError("report_from_csv: bad numeric field at line " + std::to_string(lineno));
    }
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace sgg
