#include "sgg/freq.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sgg {

std::int64_t TripletCounts::total() const {
  std::int64_t t = 0;
  for (const auto& [k, v] : table) t += v;
  return t;
}

TripletCounts triplet_counts(const std::vector<SceneGraph>& train) {
  TripletCounts c;
  for (const SceneGraph& g : train) {
    for (const FgEdge& e : g.fg_edges) {
      ++c.table[{g.nodes[e.subject], e.predicate, g.nodes[e.object]}];
    }
  }
  return c;
}

FreqModel fit_freq(const std::vector<SceneGraph>& train, double smoothing,
                   int num_predicates) {
  if (train.empty()) {
    throw DegenerateInputError("fit_freq: empty training set");
  }
  if (smoothing < 0) {
    throw ValidationError("fit_freq: smoothing must be >= 0");
  }
  FreqModel m;
  m.smoothing = smoothing;
  int max_pred = 0;
  for (const SceneGraph& g : train) {
    for (const FgEdge& e : g.fg_edges) {
      ++m.counts[{g.nodes[e.subject], g.nodes[e.object]}][e.predicate];
      max_pred = std::max(max_pred, e.predicate);
    }
  }
  m.num_predicates = num_predicates > 0 ? num_predicates : max_pred;
  if (num_predicates > 0 && max_pred > num_predicates) {
    throw ValidationError("fit_freq: training set contains predicate id " +
                          std::to_string(max_pred) + " > num_predicates");
  }
  return m;
}

std::vector<double> freq_predict(const FreqModel& model, ClassId subject,
                                 ClassId object) {
  const int p = model.num_predicates;
  if (p < 1) {
    throw DegenerateInputError("freq_predict: model has no predicate classes");
  }
  std::vector<double> dist(static_cast<std::size_t>(p) + 1, 0.0);
  auto it = model.counts.find({subject, object});
  if (it == model.counts.end()) {
    if (model.smoothing <= 0.0) {
      throw UnseenPairError("freq_predict: unseen pair (" + std::to_string(subject) +
                            ", " + std::to_string(object) + ") with smoothing = 0");
    }
    for (int r = 1; r <= p; ++r) dist[r] = 1.0 / p;
    return dist;
  }
  std::int64_t total = 0;
  for (const auto& [pred, n] : it->second) total += n;
  const double denom = static_cast<double>(total) + model.smoothing * p;
  for (int r = 1; r <= p; ++r) {
    auto cit = it->second.find(r);
    const double n = cit == it->second.end() ? 0.0 : static_cast<double>(cit->second);
    dist[r] = (n + model.smoothing) / denom;
  }
  return dist;
}

PredicateId freq_argmax(const FreqModel& model, ClassId subject, ClassId object) {
  const std::vector<double> dist = freq_predict(model, subject, object);
  PredicateId best = 1;
  for (int r = 2; r <= model.num_predicates; ++r) {
    if (dist[r] > dist[best]) best = r;  // ties keep the lower id
  }
  return best;
}

std::set<TripletKey> zero_shot_set(const TripletCounts& counts,
                                   const std::vector<SceneGraph>& test,
                                   std::int64_t n) {
  std::set<TripletKey> out;
  for (const SceneGraph& g : test) {
    for (const FgEdge& e : g.fg_edges) {
      const TripletKey k{g.nodes[e.subject], e.predicate, g.nodes[e.object]};
      if (counts.count(k) <= n) out.insert(k);
    }
  }
  return out;
}

namespace {

template <typename Fn>
void parse_nested3(const nlohmann::json& j, Fn&& emit) {
  for (const auto& [k1, v1] : j.items()) {
    for (const auto& [k2, v2] : v1.items()) {
      for (const auto& [k3, v3] : v2.items()) {
        emit(std::stoi(k1), std::stoi(k2), std::stoi(k3), v3.template get<std::int64_t>());
      }
    }
  }
}

}  // namespace

std::string freq_to_json(const FreqModel& model) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [pair, preds] : model.counts) {
    auto& row = counts[std::to_string(pair.first)][std::to_string(pair.second)];
    for (const auto& [pred, n] : preds) {
      row[std::to_string(pred)] = n;
    }
  }
  nlohmann::json j;
  j["smoothing"] = model.smoothing;
  j["num_predicates"] = model.num_predicates;
  j["counts"] = std::move(counts);
  return j.dump();
}

FreqModel freq_from_json(const std::string& text) {
  FreqModel m;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    m.smoothing = j.at("smoothing").get<double>();
    m.num_predicates = j.at("num_predicates").get<int>();
    parse_nested3(j.at("counts"), [&](int s, int o, int p, std::int64_t n) {
      m.counts[{s, o}][p] = n;
    });
  } catch (const std::exception& e) {
    throw IoError(std::string("freq_from_json: ") + e.what());
  }
  return m;
}

std::string triplet_counts_to_json(const TripletCounts& counts) {
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [k, n] : counts.table) {
    c[std::to_string(k.subject)][std::to_string(k.predicate)][std::to_string(k.object)] = n;
  }
  nlohmann::json j;
  j["counts"] = std::move(c);
  return j.dump();
}

TripletCounts triplet_counts_from_json(const std::string& text) {
  TripletCounts c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    parse_nested3(j.at("counts"), [&](int s, int p, int o, std::int64_t n) {
      c.table[{s, p, o}] = n;
    });
  } catch (const std::exception& e) {
    throw IoError(std::string("triplet_counts_from_json: ") + e.what());
  }
  return c;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void save_freq(const std::string& path, const FreqModel& model) {
  spit(path, freq_to_json(model));
}

FreqModel load_freq(const std::string& path) { return freq_from_json(slurp(path)); }

void save_triplet_counts(const std::string& path, const TripletCounts& counts) {
  spit(path, triplet_counts_to_json(counts));
}

TripletCounts load_triplet_counts(const std::string& path) {
  return triplet_counts_from_json(slurp(path));
}

}  // namespace sgg
