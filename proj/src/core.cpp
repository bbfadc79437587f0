#include "sgg/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"

#include "sgg/freq.hpp"

namespace sgg {

std::string to_string(Task t) {
  return t == Task::PredCls ? "predcls" : "sgcls";
}

Task task_from_string(const std::string& s) {
  if (s == "predcls") return Task::PredCls;
  if (s == "sgcls") return Task::SGCls;
  throw ValidationError("unknown task: " + s);
}

SceneGraph validate_graph(const SceneGraph& raw) {
  if (raw.nodes.empty()) {
    throw ValidationError("graph '" + raw.graph_id + "': node count must be >= 1");
  }
  const int n = static_cast<int>(raw.nodes.size());
  for (ClassId c : raw.nodes) {
    if (c < 0) {
      throw ValidationError("graph '" + raw.graph_id + "': negative object class id");
    }
  }

  SceneGraph g;
  g.graph_id = raw.graph_id;
  g.nodes = raw.nodes;
  g.fg_edges.reserve(raw.fg_edges.size());

  std::set<std::pair<int, int>> seen;
  for (const FgEdge& e : raw.fg_edges) {
    if (e.subject < 0 || e.subject >= n || e.object < 0 || e.object >= n) {
      throw ValidationError("graph '" + raw.graph_id + "': node index out of range");
    }
    if (e.subject == e.object) {
      throw ValidationError("graph '" + raw.graph_id + "': self-loop edge on node " +
                            std::to_string(e.subject));
    }
    if (e.predicate < 1) {
      throw ValidationError("graph '" + raw.graph_id +
                            "': predicate id must be >= 1 (0 is reserved for BG)");
    }
    // keep-first dedup per ordered pair
    if (seen.insert({e.subject, e.object}).second) {
      g.fg_edges.push_back(e);
    }
  }
  return g;
}

Batch make_batch(std::vector<SceneGraph> graphs) {
  if (graphs.empty()) {
    throw DegenerateInputError("make_batch: empty graph sequence");
  }
  Batch b;
  b.graphs = std::move(graphs);
  for (const SceneGraph& g : b.graphs) {
    b.n_total += g.node_count();
    b.m_fg += g.fg_count();
    b.m_bg += g.bg_count();
  }
  const std::size_t m = b.m_fg + b.m_bg;
  b.density = m > 0 ? static_cast<double>(b.m_fg) / static_cast<double>(m) : 0.0;
  return b;
}

double graph_density(const SceneGraph& g) {
  const std::size_t m = g.pair_count();
  if (m == 0) {
    throw DegenerateInputError("graph_density: undefined for N <= 1 (graph '" +
                               g.graph_id + "')");
  }
  return static_cast<double>(g.fg_count()) / static_cast<double>(m);
}

double graph_density(const Batch& b) {
  const std::size_t m = b.m_fg + b.m_bg;
  if (m == 0) {
    throw DegenerateInputError("graph_density: undefined, every graph in the batch has N <= 1");
  }
  return static_cast<double>(b.m_fg) / static_cast<double>(m);
}

std::vector<std::pair<int, int>> enumerate_bg_pairs(const SceneGraph& g) {
  std::set<std::pair<int, int>> fg;
  for (const FgEdge& e : g.fg_edges) {
    fg.insert({e.subject, e.object});
  }
  std::vector<std::pair<int, int>> out;
  out.reserve(g.bg_count());
  const int n = static_cast<int>(g.node_count());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !fg.count({i, j})) {
        out.emplace_back(i, j);
      }
    }
  }
  return out;
}

namespace {

struct RunningStats {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double x) {
    min = std::min(min, x);
    max = std::max(max, x);
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double stddev() const {
    if (!count) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - m * m));
  }
};

}  // namespace

StatsReport dataset_stats(const std::vector<SceneGraph>& dataset,
                          const TripletCounts* train_counts) {
  if (dataset.empty()) {
    throw DegenerateInputError("dataset_stats: empty dataset");
  }

  StatsReport r;
  r.image_count = dataset.size();

  RunningStats n_stats, d_stats;
  std::set<TripletKey> unique;
  for (const SceneGraph& g : dataset) {
    n_stats.add(static_cast<double>(g.node_count()));
    if (g.pair_count() > 0) {
      d_stats.add(graph_density(g));
    }
    for (const FgEdge& e : g.fg_edges) {
      unique.insert({g.nodes[e.subject], e.predicate, g.nodes[e.object]});
      ++r.total_triplet_count;
    }
  }
  r.unique_triplet_count = unique.size();
  r.n_min = n_stats.min;
  r.n_max = n_stats.max;
  r.n_mean = n_stats.mean();
  r.n_std = n_stats.stddev();
  r.density_count = d_stats.count;
  if (d_stats.count > 0) {
    r.d_min = d_stats.min;
    r.d_max = d_stats.max;
    r.d_mean = d_stats.mean();
    r.d_std = d_stats.stddev();
  }

  if (train_counts) {
    std::size_t zs_total = 0;
    for (const SceneGraph& g : dataset) {
      for (const FgEdge& e : g.fg_edges) {
        if (train_counts->count({g.nodes[e.subject], e.predicate, g.nodes[e.object]}) == 0) {
          ++zs_total;
        }
      }
    }
    r.zs_unique = zero_shot_set(*train_counts, dataset, 0).size();
    r.zs_total = zs_total;
  }
  return r;
}

std::vector<SceneGraph> read_graphs_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open graph file: " + path);
  }
  std::vector<SceneGraph> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    SceneGraph g;
    try {
      g.graph_id = j.at("graph_id").get<std::string>();
      g.nodes = j.at("nodes").get<std::vector<ClassId>>();
      for (const auto& t : j.at("fg_edges")) {
        if (!t.is_array() || t.size() != 3) {
          throw IoError(path + ":" + std::to_string(lineno) +
                        ": fg_edges entries must be [subject, object, predicate]");
        }
        g.fg_edges.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(validate_graph(g));
  }
  return out;
}

void write_graphs_jsonl(const std::string& path, const std::vector<SceneGraph>& graphs) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  for (const SceneGraph& g : graphs) {
    nlohmann::json j;
    j["graph_id"] = g.graph_id;
    j["nodes"] = g.nodes;
    auto edges = nlohmann::json::array();
    for (const FgEdge& e : g.fg_edges) {
      edges.push_back({e.subject, e.object, e.predicate});
    }
    j["fg_edges"] = std::move(edges);
    out << j.dump() << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace sgg
