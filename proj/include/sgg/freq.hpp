#pragma once
// Frequency-bias baseline P(R | subject class, object class), triplet
// occurrence counting, and zero/n-shot set construction.
//
// The Freq baseline models predicates conditioned on an edge existing:
// BG receives no probability mass. Zero-shot identity is by class triple
// only, never by node identity.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sgg/core.hpp"

namespace sgg {

struct TripletKey {
  ClassId subject = 0;
  PredicateId predicate = 0;
  ClassId object = 0;

  auto operator<=>(const TripletKey&) const = default;
};

// Occurrence counts n_t of class-level triplets in a training set.
// Absent key means n_t = 0.
struct TripletCounts {
  std::map<TripletKey, std::int64_t> table;

  std::int64_t count(const TripletKey& k) const {
    auto it = table.find(k);
    return it == table.end() ? 0 : it->second;
  }
  std::int64_t total() const;
};

TripletCounts triplet_counts(const std::vector<SceneGraph>& train);

// Co-occurrence table (subject class, object class) -> per-predicate counts,
// with additive smoothing applied at query time.
struct FreqModel {
  std::map<std::pair<ClassId, ClassId>, std::map<PredicateId, std::int64_t>> counts;
  double smoothing = 0.0;
  int num_predicates = 0;
};

// Tallies FG-edge co-occurrences. num_predicates = 0 infers the vocabulary
// from the largest predicate id seen in the training set.
FreqModel fit_freq(const std::vector<SceneGraph>& train, double smoothing,
                   int num_predicates = 0);

// Normalized distribution over predicates 1..P, returned as a vector of
// size P+1 with index 0 (BG) fixed at 0. Unseen pairs: uniform when
// smoothing > 0, UnseenPairError when smoothing = 0.
std::vector<double> freq_predict(const FreqModel& model, ClassId subject,
                                 ClassId object);

// Most frequent predicate for a pair; ties break toward the lower id.
PredicateId freq_argmax(const FreqModel& model, ClassId subject, ClassId object);

// Every distinct test triplet with n_t <= n. n = 0 yields the zero-shot set.
std::set<TripletKey> zero_shot_set(const TripletCounts& counts,
                                   const std::vector<SceneGraph>& test,
                                   std::int64_t n);

// JSON serialization (nested maps keyed by decimal class-id strings).
std::string freq_to_json(const FreqModel& model);
FreqModel freq_from_json(const std::string& text);
void save_freq(const std::string& path, const FreqModel& model);
FreqModel load_freq(const std::string& path);

std::string triplet_counts_to_json(const TripletCounts& counts);
TripletCounts triplet_counts_from_json(const std::string& text);
void save_triplet_counts(const std::string& path, const TripletCounts& counts);
TripletCounts load_triplet_counts(const std::string& path);

}  // namespace sgg
