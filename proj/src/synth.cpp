#include "sgg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace sgg {

std::string to_string(DensityProfile p) {
  return p == DensityProfile::vg ? "vg" : "gqa";
}

DensityProfile profile_from_string(const std::string& s) {
  if (s == "vg") return DensityProfile::vg;
  if (s == "gqa") return DensityProfile::gqa;
  throw ValidationError("unknown density profile: " + s);
}

std::size_t profile_fg_count(DensityProfile profile, std::size_t n) {
  if (n < 2) return 0;
  const std::size_t universe = n * (n - 1);
  const double target = profile == DensityProfile::vg ? 0.5 * static_cast<double>(n)
                                                      : 8.0 * static_cast<double>(n);
  // nearbyint under the default rounding mode rounds ties to even
  const auto m = static_cast<std::size_t>(std::nearbyint(target));
  return std::min(m, universe);
}

void validate_world_config(const WorldConfig& cfg) {
  if (cfg.c_obj < 2 || cfg.c_pred < 2) {
    throw ValidationError("world config: vocabulary sizes must be >= 2");
  }
  if (cfg.n_dist.n_min < 1 || cfg.n_dist.n_max < cfg.n_dist.n_min) {
    throw ValidationError("world config: need 1 <= n_min <= n_max");
  }
  if (cfg.n_dist.skew < 0) {
    throw ValidationError("world config: n skew must be >= 0");
  }
  if (cfg.zipf_exponent < 0) {
    throw ValidationError("world config: zipf exponent must be >= 0");
  }
  if (cfg.holdout_fraction < 0 || cfg.holdout_fraction > 0.5) {
    throw ValidationError("world config: holdout fraction must be in [0, 0.5]");
  }
  if (cfg.feature_dim < 1) {
    throw ValidationError("world config: feature_dim must be >= 1");
  }
  if (cfg.noise_scale < 0) {
    throw ValidationError("world config: noise_scale must be >= 0");
  }
}

namespace {

std::vector<double> zipf_weights(std::size_t count, double exponent) {
  std::vector<double> w(count);
  for (std::size_t k = 0; k < count; ++k) {
    w[k] = std::pow(static_cast<double>(k + 1), -exponent);
  }
  return w;
}

void normalize_row(std::vector<double>& row) {
  double sum = 0.0;
  for (std::size_t r = 1; r < row.size(); ++r) sum += row[r];
  for (std::size_t r = 1; r < row.size(); ++r) row[r] /= sum;
}

}  // namespace

World make_world(const WorldConfig& cfg) {
  validate_world_config(cfg);
  World w;
  w.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int c_obj = cfg.c_obj;
  const int c_pred = cfg.c_pred;
  w.object_weights = zipf_weights(static_cast<std::size_t>(c_obj), cfg.zipf_exponent);

  // Planted rows: Zipf mass over a per-pair permutation of the predicates,
  // with a lognormal jitter (scaled by the exponent) so different pairs do
  // not share identical top probabilities. Exponent 0 keeps rows uniform.
  const std::vector<double> base = zipf_weights(static_cast<std::size_t>(c_pred),
                                                cfg.zipf_exponent);
  w.planted.assign(c_obj, std::vector<std::vector<double>>(
                              c_obj, std::vector<double>(c_pred + 1, 0.0)));
  std::vector<PredicateId> perm(c_pred);
  for (int s = 0; s < c_obj; ++s) {
    for (int o = 0; o < c_obj; ++o) {
      std::iota(perm.begin(), perm.end(), 1);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<double>& row = w.planted[s][o];
      for (int m = 0; m < c_pred; ++m) {
        const double jitter = std::exp(0.5 * cfg.zipf_exponent * normal(rng));
        row[perm[m]] = base[m] * jitter;
      }
      normalize_row(row);
    }
  }

  w.object_emb.assign(c_obj, std::vector<double>(cfg.feature_dim));
  for (auto& e : w.object_emb) {
    for (double& x : e) x = normal(rng);
  }
  w.predicate_emb.assign(c_pred + 1, std::vector<double>(cfg.feature_dim));
  for (auto& e : w.predicate_emb) {
    for (double& x : e) x = normal(rng);
  }

  if (cfg.holdout_fraction > 0) {
    // Witnessed support: compositions covering 99.5% of the planted mass.
    std::vector<std::pair<double, TripletKey>> mass;
    double obj_norm = 0.0;
    for (double x : w.object_weights) obj_norm += x;
    double total = 0.0;
    for (int s = 0; s < c_obj; ++s) {
      for (int o = 0; o < c_obj; ++o) {
        const double pair_mass =
            (w.object_weights[s] / obj_norm) * (w.object_weights[o] / obj_norm);
        for (int r = 1; r <= c_pred; ++r) {
          const double m = pair_mass * w.planted[s][o][r];
          mass.push_back({m, {s, r, o}});
          total += m;
        }
      }
    }
    std::sort(mass.begin(), mass.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<TripletKey> support;
    double cum = 0.0;
    for (const auto& [m, key] : mass) {
      support.push_back(key);
      cum += m;
      if (cum >= 0.995 * total) break;
    }

    const std::size_t n_hold = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(cfg.holdout_fraction * static_cast<double>(support.size()))));
    std::shuffle(support.begin(), support.end(), rng);
    // Never strip a pair of its last predicate, or train sampling for that
    // pair would have no valid label left.
    std::map<std::pair<ClassId, ClassId>, int> held_per_pair;
    for (const TripletKey& key : support) {
      if (w.holdout.size() >= n_hold) break;
      int& held = held_per_pair[{key.subject, key.object}];
      if (held + 1 >= c_pred) continue;
      ++held;
      w.holdout.insert(key);
    }
    if (w.holdout.size() < n_hold) {
      throw DegenerateInputError("make_world: holdout infeasible, support too small");
    }
  }

  w.train_planted = w.planted;
  for (const TripletKey& key : w.holdout) {
    w.train_planted[key.subject][key.object][key.predicate] = 0.0;
  }
  for (const TripletKey& key : w.holdout) {
    normalize_row(w.train_planted[key.subject][key.object]);
  }
  return w;
}

std::pair<SceneGraph, FeatureBundle> sample_graph(const World& world, Split split,
                                                  std::mt19937_64& rng,
                                                  std::string graph_id) {
  const WorldConfig& cfg = world.config;

  // Graph size.
  const std::size_t n_range = static_cast<std::size_t>(cfg.n_dist.n_max - cfg.n_dist.n_min) + 1;
  std::vector<double> n_weights = zipf_weights(n_range, cfg.n_dist.skew);
  std::discrete_distribution<int> n_sampler(n_weights.begin(), n_weights.end());
  const int n = cfg.n_dist.n_min + n_sampler(rng);

  SceneGraph g;
  g.graph_id = std::move(graph_id);
  std::discrete_distribution<int> class_sampler(world.object_weights.begin(),
                                                world.object_weights.end());
  g.nodes.resize(n);
  for (int i = 0; i < n; ++i) g.nodes[i] = class_sampler(rng);

  // FG pairs: a uniform subset of the ordered-pair universe.
  const std::size_t m_fg = profile_fg_count(cfg.profile, static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> universe;
  universe.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) universe.emplace_back(i, j);
    }
  }
  std::vector<std::pair<int, int>> chosen;
  std::sample(universe.begin(), universe.end(), std::back_inserter(chosen), m_fg, rng);

  const auto& table = split == Split::train ? world.train_planted : world.planted;
  for (const auto& [i, j] : chosen) {
    const std::vector<double>& row = table[g.nodes[i]][g.nodes[j]];
    std::discrete_distribution<int> pred_sampler(row.begin() + 1, row.end());
    g.fg_edges.push_back({i, j, pred_sampler(rng) + 1});
  }

  // Features.
  FeatureBundle fb;
  std::normal_distribution<double> noise(0.0, cfg.noise_scale > 0 ? cfg.noise_scale : 1.0);
  auto noisy = [&](double base) {
    return cfg.noise_scale > 0 ? base + noise(rng) : base;
  };
  fb.node_features.resize(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<double>& emb = world.object_emb[g.nodes[i]];
    fb.node_features[i].resize(cfg.feature_dim);
    for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
      fb.node_features[i][d] = noisy(emb[d]);
    }
  }
  std::map<std::pair<int, int>, PredicateId> fg_label;
  for (const FgEdge& e : g.fg_edges) fg_label[{e.subject, e.object}] = e.predicate;
  for (const auto& [i, j] : universe) {
    auto it = fg_label.find({i, j});
    const std::vector<double>& sig =
        it == fg_label.end() ? world.predicate_emb[0] : world.predicate_emb[it->second];
    std::vector<double> f;
    f.reserve(3 * cfg.feature_dim);
    for (double x : world.object_emb[g.nodes[i]]) f.push_back(noisy(x));
    for (double x : world.object_emb[g.nodes[j]]) f.push_back(noisy(x));
    for (double x : sig) f.push_back(noisy(x));
    fb.edge_features[{i, j}] = std::move(f);
  }

  return {std::move(g), std::move(fb)};
}

namespace {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t salt) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(seed) ^ salt);
}

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, i);
  return buf;
}

DatasetSplit generate_split(const World& world, Split split, std::size_t count,
                            std::uint64_t salt) {
  std::mt19937_64 rng(split_seed(world.config.seed, salt));
  DatasetSplit ds;
  ds.graphs.reserve(count);
  ds.features.reserve(count);
  const char* prefix = split == Split::train ? "train_" : "test_";
  for (std::size_t i = 0; i < count; ++i) {
    auto [g, fb] = sample_graph(world, split, rng, padded_id(prefix, i));
    ds.graphs.push_back(std::move(g));
    ds.features.push_back(std::move(fb));
  }
  return ds;
}

nlohmann::json stats_to_json(const StatsReport& s) {
  nlohmann::json j;
  j["image_count"] = s.image_count;
  j["unique_triplet_count"] = s.unique_triplet_count;
  j["total_triplet_count"] = s.total_triplet_count;
  j["n_min"] = s.n_min;
  j["n_max"] = s.n_max;
  j["n_mean"] = s.n_mean;
  j["n_std"] = s.n_std;
  j["d_min"] = s.d_min;
  j["d_max"] = s.d_max;
  j["d_mean"] = s.d_mean;
  j["d_std"] = s.d_std;
  j["density_count"] = s.density_count;
  if (s.zs_unique) j["zs_unique"] = *s.zs_unique;
  if (s.zs_total) j["zs_total"] = *s.zs_total;
  return j;
}

nlohmann::json config_to_json_obj(const WorldConfig& cfg) {
  nlohmann::json j;
  j["c_obj"] = cfg.c_obj;
  j["c_pred"] = cfg.c_pred;
  j["profile"] = to_string(cfg.profile);
  j["n_min"] = cfg.n_dist.n_min;
  j["n_max"] = cfg.n_dist.n_max;
  j["n_skew"] = cfg.n_dist.skew;
  j["zipf_exponent"] = cfg.zipf_exponent;
  j["holdout_fraction"] = cfg.holdout_fraction;
  j["feature_dim"] = cfg.feature_dim;
  j["noise_scale"] = cfg.noise_scale;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

std::string world_config_to_json(const WorldConfig& cfg) {
  return config_to_json_obj(cfg).dump();
}

std::string Manifest::to_json() const {
  nlohmann::json j;
  j["config"] = config_to_json_obj(config);
  auto hj = nlohmann::json::array();
  for (const TripletKey& k : holdout) {
    hj.push_back({k.subject, k.predicate, k.object});
  }
  j["holdout"] = std::move(hj);
  j["train_stats"] = stats_to_json(train_stats);
  j["test_stats"] = stats_to_json(test_stats);
  j["test_resamples"] = test_resamples;
  return j.dump(2);
}

Dataset make_dataset(const World& world, std::size_t train_images,
                     std::size_t test_images) {
  if (train_images < 1 || test_images < 1) {
    throw ValidationError("make_dataset: image counts must be >= 1");
  }
  constexpr int kMaxResamples = 8;

  Dataset ds;
  ds.train = generate_split(world, Split::train, train_images, 0x7472ULL);
  const TripletCounts counts = triplet_counts(ds.train.graphs);

  int retries = 0;
  for (;;) {
    ds.test = generate_split(world, Split::test, test_images,
                             0x7465ULL + static_cast<std::uint64_t>(retries));
    if (world.config.holdout_fraction == 0 ||
        !zero_shot_set(counts, ds.test.graphs, 0).empty()) {
      break;
    }
    if (++retries > kMaxResamples) {
      throw Error("make_dataset: retry limit exhausted without a zero-shot test triplet");
    }
  }

  ds.manifest.config = world.config;
  ds.manifest.holdout.assign(world.holdout.begin(), world.holdout.end());
  ds.manifest.train_stats = dataset_stats(ds.train.graphs);
  ds.manifest.test_stats = dataset_stats(ds.test.graphs, &counts);
  ds.manifest.test_resamples = retries;
  return ds;
}

}  // namespace sgg
