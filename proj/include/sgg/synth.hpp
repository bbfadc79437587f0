#pragma once
// Synthetic scene-graph world generator: controllable graph-size
// distribution, VG/GQA density profiles, Zipf long-tail predicate and
// object-class frequencies, held-out zero-shot compositions, and learnable
// Gaussian features.
//
// A World fixes the generative ground truth (planted conditional table
// P(R|s,o), class embeddings, holdout set); sample_graph draws images from
// it. Train-split sampling rejects holdout compositions by drawing from a
// renormalized table with those compositions zeroed, which is exactly the
// rejection-sampling distribution.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sgg/core.hpp"
#include "sgg/freq.hpp"
#include "sgg/model.hpp"

namespace sgg {

enum class DensityProfile { vg, gqa };

std::string to_string(DensityProfile p);
DensityProfile profile_from_string(const std::string& s);

// FG edge count as a function of N: VG-like round(0.5 N), GQA-like
// min(round(8 N), N (N - 1)). Rounding is round-half-to-even, clamped to
// the pair universe.
std::size_t profile_fg_count(DensityProfile profile, std::size_t n);

struct NDistribution {
  int n_min = 4;
  int n_max = 24;
  double skew = 0.0;  // P(N) proportional to (N - n_min + 1)^(-skew); 0 = uniform
};

struct WorldConfig {
  int c_obj = 16;
  int c_pred = 8;
  DensityProfile profile = DensityProfile::vg;
  NDistribution n_dist;
  double zipf_exponent = 1.0;     // long-tail strength for P(R|s,o) and classes
  double holdout_fraction = 0.1;  // in [0, 0.5]
  std::size_t feature_dim = 8;
  double noise_scale = 0.05;
  std::uint64_t seed = 0;
};

void validate_world_config(const WorldConfig& cfg);

struct World {
  WorldConfig config;
  // planted[s][o]: distribution over predicates, size c_pred + 1, [0] = 0.
  std::vector<std::vector<std::vector<double>>> planted;
  // Train view: holdout compositions zeroed and rows renormalized.
  std::vector<std::vector<std::vector<double>>> train_planted;
  std::vector<double> object_weights;  // Zipf class-sampling weights
  std::vector<std::vector<double>> object_emb;     // c_obj x feature_dim
  std::vector<std::vector<double>> predicate_emb;  // c_pred + 1 vectors; [0] = BG signal
  std::set<TripletKey> holdout;
};

// Deterministic given cfg.seed. The RNG stream does not depend on n_dist,
// so worlds differing only in the graph-size sampler share their planted
// table, embeddings and holdout set.
World make_world(const WorldConfig& cfg);

enum class Split { train, test };

// Node feature = class embedding + noise. Edge feature =
// [subject emb | object emb | predicate emb (FG) or BG signal] + noise.
std::pair<SceneGraph, FeatureBundle> sample_graph(const World& world, Split split,
                                                  std::mt19937_64& rng,
                                                  std::string graph_id);

struct DatasetSplit {
  std::vector<SceneGraph> graphs;
  std::vector<FeatureBundle> features;
};

struct Manifest {
  WorldConfig config;
  std::vector<TripletKey> holdout;
  StatsReport train_stats;
  StatsReport test_stats;  // includes zero-shot counts w.r.t. the train split
  int test_resamples = 0;

  std::string to_json() const;
};

struct Dataset {
  DatasetSplit train;
  DatasetSplit test;
  Manifest manifest;
};

// Deterministic given the world. When holdout_fraction > 0 the test split
// is guaranteed to contain at least one zero-shot triplet instance,
// resampling up to a bounded retry limit.
Dataset make_dataset(const World& world, std::size_t train_images,
                     std::size_t test_images);

std::string world_config_to_json(const WorldConfig& cfg);

}  // namespace sgg
