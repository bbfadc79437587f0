#include "doctest.h"

#include <cstdio>
#include <random>

#include "sgg/metrics.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace sgg;

namespace {

Prediction single_pair_prediction(const SceneGraph& g, std::vector<double> pair_dist) {
  Prediction p;
  p.graph_id = g.graph_id;
  for (ClassId c : g.nodes) {
    std::vector<double> one_hot(4, 0.0);
    one_hot[c] = 1.0;
    p.node_probs.push_back(std::move(one_hot));
  }
  p.pair_probs[{0, 1}] = pair_dist;
  // reverse pair: all mass on BG so its candidates sort last
  std::vector<double> bg_only(pair_dist.size(), 0.0);
  bg_only[0] = 1.0;
  p.pair_probs[{1, 0}] = std::move(bg_only);
  return p;
}

}  // namespace

TEST_CASE("rank_triplets on a single pair") {
  const SceneGraph g = testutil::graph("g", {0, 1}, {{0, 1, 1}});
  const Prediction p = single_pair_prediction(g, {0.0, 0.7, 0.3});

  SUBCASE("constrained keeps only the argmax predicate") {
    const auto ranked = rank_triplets(p, g, true, Task::PredCls);
    REQUIRE(ranked.size() == 2);  // one per pair
    CHECK(ranked[0].predicate == 1);
    CHECK(ranked[0].score == doctest::Approx(0.7));
  }
  SUBCASE("unconstrained emits every non-BG predicate in score order") {
    const auto ranked = rank_triplets(p, g, false, Task::PredCls);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].score == doctest::Approx(0.7));
    CHECK(ranked[0].predicate == 1);
    CHECK(ranked[1].predicate == 2);
    CHECK(ranked[1].score == doctest::Approx(0.3));
  }
  SUBCASE("missing pair distribution is an error") {
    Prediction broken = p;
    broken.pair_probs.erase({1, 0});
    CHECK_THROWS_AS(rank_triplets(broken, g, false, Task::PredCls), ValidationError);
  }
}

TEST_CASE("unconstrained ranking equals a brute-force sort of all products") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const SceneGraph g = testutil::random_graph(rng, "g", 4, 4, 3, 0.5);
    const Prediction p = testutil::random_prediction(rng, g, 4, 3);
    for (Task task : {Task::PredCls, Task::SGCls}) {
      for (bool constrained : {false, true}) {
        const auto got = rank_triplets(p, g, constrained, task);
        const auto want = oracle::rank_bruteforce(p, g, constrained, task);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(oracle::identity_of(got[i]) == oracle::identity_of(want[i]));
          CHECK(got[i].score == want[i].score);
        }
      }
    }
  }
}

TEST_CASE("image_recall_at_k") {
  // Two GT edges; scores put exactly one of them in the top 2.
  const SceneGraph g = testutil::graph("g", {2, 3}, {{0, 1, 1}, {1, 0, 2}});
  Prediction p;
  p.graph_id = "g";
  p.node_probs = {{0, 0, 1, 0}, {0, 0, 0, 1}};
  p.pair_probs[{0, 1}] = {0.0, 0.9, 0.1};
  p.pair_probs[{1, 0}] = {0.0, 0.8, 0.2};

  const auto ranked = rank_triplets(p, g, false, Task::PredCls);
  const auto gt = gt_triplets(g);

  SUBCASE("one of two GT triplets in the top 2") {
    CHECK(image_recall_at_k(ranked, gt, 2) == doctest::Approx(0.5));
  }
  SUBCASE("K covering all candidates recovers every GT predicate") {
    CHECK(image_recall_at_k(ranked, gt, static_cast<int>(ranked.size())) == 1.0);
  }
  SUBCASE("empty GT signals skip") {
    CHECK_THROWS_AS(image_recall_at_k(ranked, {}, 2), DegenerateInputError);
  }
  SUBCASE("bad K") {
    CHECK_THROWS_AS(image_recall_at_k(ranked, gt, 0), ValidationError);
  }
}

TEST_CASE("n_shot_filter") {
  TripletCounts counts;
  counts.table[{2, 1, 3}] = 4;
  const SceneGraph g = testutil::graph("g", {2, 3}, {{0, 1, 1}, {1, 0, 2}});
  // triplets: (2,1,3) with n_t=4, (3,2,2) with n_t=0

  SUBCASE("huge n is the identity on graphs with GT") {
    const auto kept = n_shot_filter({g}, counts, 1'000'000);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].fg_edges.size() == 2);
  }
  SUBCASE("n=0 keeps only the zero-shot edge") {
    const auto kept = n_shot_filter({g}, counts, 0);
    REQUIRE(kept.size() == 1);
    REQUIRE(kept[0].fg_edges.size() == 1);
    CHECK(kept[0].fg_edges[0].predicate == 2);
  }
  SUBCASE("train-identical test is emptied at n=0") {
    std::mt19937_64 rng(53);
    std::vector<SceneGraph> train;
    for (int i = 0; i < 10; ++i) {
      train.push_back(testutil::random_graph(rng, "t" + std::to_string(i), 5, 4, 3, 0.5));
    }
    CHECK(n_shot_filter(train, triplet_counts(train), 0).empty());
  }
}

TEST_CASE("triplet_rank in PredCls counts strictly higher predicates") {
  const SceneGraph g = testutil::graph("g", {0, 1}, {{0, 1, 1}});
  Prediction p = single_pair_prediction(g, {0.0, 0.2, 0.5, 0.3});

  SUBCASE("top predicate ranks first") {
    SceneGraph g2 = g;
    g2.fg_edges[0].predicate = 2;
    CHECK(triplet_rank(p, g2, g2.fg_edges[0], Task::PredCls) == 1);
  }
  SUBCASE("third-highest predicate ranks third") {
    CHECK(triplet_rank(p, g, g.fg_edges[0], Task::PredCls) == 3);
  }
}

TEST_CASE("SGCls triplet rank equals exhaustive enumeration on a small vocabulary") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 40; ++trial) {
    const SceneGraph g = testutil::random_graph(rng, "g", 4, 3, 2, 0.6);
    const Prediction p = testutil::random_prediction(rng, g, 3, 2);
    for (const FgEdge& e : g.fg_edges) {
      CHECK(triplet_rank(p, g, e, Task::SGCls) ==
            oracle::triplet_rank_bruteforce(p, g, e, Task::SGCls));
    }
  }
}

TEST_CASE("weighted triplet recall") {
  SUBCASE("worked example: n_t = (0, 1, 9), one hit on the zero-shot triplet") {
    TripletCounts counts;
    counts.table[{0, 2, 1}] = 1;
    counts.table[{0, 3, 1}] = 9;
    // three GT triplets on separate images; only the zero-shot one ranked first
    std::vector<SceneGraph> graphs = {
        testutil::graph("a", {0, 1}, {{0, 1, 1}}),   // n_t = 0
        testutil::graph("b", {0, 1}, {{0, 1, 2}}),   // n_t = 1
        testutil::graph("c", {0, 1}, {{0, 1, 3}}),   // n_t = 9
    };
    std::vector<Prediction> preds;
    for (const SceneGraph& g : graphs) {
      // predicate 1 always wins; rank 1 only for the first image's GT
      preds.push_back(single_pair_prediction(g, {0.0, 0.6, 0.25, 0.15}));
    }
    const double wr = weighted_triplet_recall(preds, graphs, counts, 1, Task::PredCls);
    CHECK(wr == doctest::Approx(0.625).epsilon(1e-9));  // (1/1) / (1 + 1/2 + 1/10)

    // sanity: unweighted recall is 1/3
    CHECK(triplet_recall(preds, graphs, 1, Task::PredCls) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("all ranked within K gives 1 regardless of counts") {
    std::mt19937_64 rng(61);
    TripletCounts counts;
    std::vector<SceneGraph> graphs;
    std::vector<Prediction> preds;
    for (int i = 0; i < 5; ++i) {
      graphs.push_back(testutil::random_graph(rng, "g" + std::to_string(i), 4, 4, 3, 0.5));
      preds.push_back(testutil::random_prediction(rng, graphs.back(), 4, 3));
      for (const FgEdge& e : graphs.back().fg_edges) {
        counts.table[{graphs.back().nodes[e.subject], e.predicate,
                      graphs.back().nodes[e.object]}] = 1 + i;
      }
    }
    // K large enough to admit every candidate rank
    CHECK(weighted_triplet_recall(preds, graphs, counts, 1000, Task::SGCls) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("uniform n_t reduces to the unweighted recall") {
    std::mt19937_64 rng(67);
    TripletCounts counts;
    std::vector<SceneGraph> graphs;
    std::vector<Prediction> preds;
    for (int i = 0; i < 6; ++i) {
      graphs.push_back(testutil::random_graph(rng, "g" + std::to_string(i), 4, 4, 3, 0.5));
      preds.push_back(testutil::random_prediction(rng, graphs.back(), 4, 3));
      for (const FgEdge& e : graphs.back().fg_edges) {
        counts.table[{graphs.back().nodes[e.subject], e.predicate,
                      graphs.back().nodes[e.object]}] = 7;
      }
    }
    CHECK(weighted_triplet_recall(preds, graphs, counts, 2, Task::PredCls) ==
          doctest::Approx(triplet_recall(preds, graphs, 2, Task::PredCls)).epsilon(1e-12));
  }
}

TEST_CASE("wR_tr downweights a predictor that only gets the most frequent triplet") {
  // Nine instances of a head triplet (n_t = 100) ranked correctly, one
  // zero-shot instance missed: the weighted metric collapses to the small
  // head weight while the unweighted one looks strong.
  TripletCounts counts;
  counts.table[{0, 1, 1}] = 100;
  std::vector<SceneGraph> graphs;
  std::vector<Prediction> preds;
  for (int i = 0; i < 9; ++i) {
    graphs.push_back(testutil::graph("h" + std::to_string(i), {0, 1}, {{0, 1, 1}}));
    preds.push_back(single_pair_prediction(graphs.back(), {0.0, 0.9, 0.1}));
  }
  graphs.push_back(testutil::graph("tail", {0, 1}, {{0, 1, 2}}));
  preds.push_back(single_pair_prediction(graphs.back(), {0.0, 0.9, 0.1}));

  const double r_tr = triplet_recall(preds, graphs, 1, Task::PredCls);
  const double wr_tr = weighted_triplet_recall(preds, graphs, counts, 1, Task::PredCls);
  CHECK(r_tr == doctest::Approx(0.9));
  const double head_weight_sum = (9.0 / 101.0) / (9.0 / 101.0 + 1.0);
  CHECK(wr_tr == doctest::Approx(head_weight_sum).epsilon(1e-9));
  CHECK(wr_tr < r_tr);
}

TEST_CASE("mean recall") {
  SUBCASE("two classes with recalls 1 and 0 average to 0.5 regardless of counts") {
    std::vector<SceneGraph> graphs;
    std::vector<Prediction> preds;
    // five instances of predicate 1, all hit
    for (int i = 0; i < 5; ++i) {
      graphs.push_back(testutil::graph("a" + std::to_string(i), {0, 1}, {{0, 1, 1}}));
      preds.push_back(single_pair_prediction(graphs.back(), {0.0, 0.9, 0.1}));
    }
    // one instance of predicate 2, missed at K=1
    graphs.push_back(testutil::graph("b", {0, 1}, {{0, 1, 2}}));
    preds.push_back(single_pair_prediction(graphs.back(), {0.0, 0.9, 0.1}));
    CHECK(mean_recall(preds, graphs, 1, false, Task::PredCls) == doctest::Approx(0.5));
  }
  SUBCASE("single predicate class: mR equals R on that restriction") {
    std::mt19937_64 rng(71);
    std::vector<SceneGraph> graphs;
    std::vector<Prediction> preds;
    for (int i = 0; i < 4; ++i) {
      graphs.push_back(testutil::random_graph(rng, "g" + std::to_string(i), 4, 3, 1, 0.5));
      preds.push_back(testutil::random_prediction(rng, graphs.back(), 3, 1));
    }
    const auto [want, nclasses] =
        oracle::mean_recall_bruteforce(preds, graphs, 2, false, Task::PredCls);
    REQUIRE(nclasses == 1);
    CHECK(mean_recall(preds, graphs, 2, false, Task::PredCls) == want);
  }
}

TEST_CASE("metrics are monotone in K") {
  std::mt19937_64 rng(73);
  std::vector<SceneGraph> graphs;
  std::vector<Prediction> preds;
  TripletCounts counts;
  for (int i = 0; i < 10; ++i) {
    graphs.push_back(testutil::random_graph(rng, "g" + std::to_string(i), 4, 4, 3, 0.4));
    preds.push_back(testutil::random_prediction(rng, graphs.back(), 4, 3));
  }
  std::uniform_int_distribution<int> cnt(0, 3);
  for (const SceneGraph& g : graphs) {
    for (const FgEdge& e : g.fg_edges) {
      const int c = cnt(rng);
      if (c > 0) counts.table[{g.nodes[e.subject], e.predicate, g.nodes[e.object]}] = c;
    }
  }
  SuiteOptions opt;
  opt.ks = {1, 2, 4, 8, 16, 64};
  opt.constrained_variant = true;
  for (Task task : {Task::PredCls, Task::SGCls}) {
    opt.task = task;
    const MetricReport report = recall_suite(preds, graphs, counts, opt);
    for (const std::string metric : {"R", "R_ZS", "mR"}) {
      for (const std::string variant : {"unconstrained", "constrained"}) {
        double prev = -1.0;
        for (int k : opt.ks) {
          const double v = report.value_of(metric, k, variant);
          CHECK(v >= prev);
          prev = v;
        }
      }
    }
    for (const std::string metric : {"R_tr", "wR_tr"}) {
      double prev = -1.0;
      for (int k : opt.ks) {
        const double v = report.value_of(metric, k, "-");
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("constrained candidates are a subset of the unconstrained ranking") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const SceneGraph g = testutil::random_graph(rng, "g", 4, 4, 3, 0.5);
    const Prediction p = testutil::random_prediction(rng, g, 4, 3);
    for (Task task : {Task::PredCls, Task::SGCls}) {
      const auto con = rank_triplets(p, g, true, task);
      const auto unc = rank_triplets(p, g, false, task);
      std::set<oracle::TripletIdentity> unc_set;
      for (const RankedTriplet& t : unc) unc_set.insert(oracle::identity_of(t));
      for (const RankedTriplet& t : con) {
        CHECK(unc_set.count(oracle::identity_of(t)) == 1);
      }
    }
  }
}

TEST_CASE("recall_suite equals the exhaustive oracles exactly on small instances") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<SceneGraph> graphs;
    std::vector<Prediction> preds;
    TripletCounts counts;
    const int images = 2 + trial % 4;
    for (int i = 0; i < images; ++i) {
      graphs.push_back(
          testutil::random_graph(rng, "g" + std::to_string(i), 4, 4, 3, 0.45));
      preds.push_back(testutil::random_prediction(rng, graphs.back(), 4, 3));
    }
    std::uniform_int_distribution<int> cnt(0, 2);
    for (const SceneGraph& g : graphs) {
      for (const FgEdge& e : g.fg_edges) {
        const int c = cnt(rng);
        if (c > 0) counts.table[{g.nodes[e.subject], e.predicate, g.nodes[e.object]}] = c;
      }
    }
    SuiteOptions opt;
    opt.ks = {1, 3, 10};
    opt.nshots = {0, 1};
    opt.constrained_variant = true;
    for (Task task : {Task::PredCls, Task::SGCls}) {
      opt.task = task;
      const MetricReport report = recall_suite(preds, graphs, counts, opt);
      for (int k : opt.ks) {
        for (bool constrained : {false, true}) {
          const std::string variant = constrained ? "constrained" : "unconstrained";
          const auto [r, r_images] = oracle::dataset_recall_bruteforce(
              preds, graphs, &counts, -1, k, constrained, task);
          CHECK(report.value_of("R", k, variant) == r);
          CHECK(report.find("R", k, variant)->count == r_images);
          const auto [zs, zs_images] = oracle::dataset_recall_bruteforce(
              preds, graphs, &counts, 0, k, constrained, task);
          CHECK(report.value_of("R_ZS", k, variant) == zs);
          CHECK(report.find("R_ZS", k, variant)->count == zs_images);
          const auto [ns, ns_images] = oracle::dataset_recall_bruteforce(
              preds, graphs, &counts, 1, k, constrained, task);
          CHECK(report.value_of("R_NS1", k, variant) == ns);
          CHECK(report.find("R_NS1", k, variant)->count == ns_images);
          const auto [mr, classes] =
              oracle::mean_recall_bruteforce(preds, graphs, k, constrained, task);
          CHECK(report.value_of("mR", k, variant) == mr);
          CHECK(report.find("mR", k, variant)->count == classes);
        }
        CHECK(report.value_of("R_tr", k, "-") ==
              oracle::triplet_recall_bruteforce(preds, graphs, k, task));
        CHECK(report.value_of("wR_tr", k, "-") ==
              oracle::weighted_triplet_recall_bruteforce(preds, graphs, counts, k, task));
      }
    }
  }
}

TEST_CASE("recall_suite rejects misaligned inputs") {
  std::mt19937_64 rng(89);
  const SceneGraph g = testutil::random_graph(rng, "g0", 4, 4, 3, 0.5);
  const Prediction p = testutil::random_prediction(rng, g, 4, 3);
  TripletCounts counts;

  SUBCASE("missing prediction") {
    Prediction other = p;
    other.graph_id = "different";
    CHECK_THROWS_AS(recall_suite({other}, {g}, counts, SuiteOptions{}), ValidationError);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(recall_suite({}, {g}, counts, SuiteOptions{}), ValidationError);
  }
  SUBCASE("bad distribution") {
    Prediction broken = p;
    broken.pair_probs.begin()->second[1] += 0.5;
    CHECK_THROWS_AS(recall_suite({broken}, {g}, counts, SuiteOptions{}), ValidationError);
  }
}

TEST_CASE("two images with recalls 1 and 0 average to 0.5") {
  std::vector<SceneGraph> graphs = {
      testutil::graph("a", {0, 1}, {{0, 1, 1}}),
      testutil::graph("b", {0, 1}, {{0, 1, 2}}),
  };
  std::vector<Prediction> preds = {
      single_pair_prediction(graphs[0], {0.0, 0.9, 0.1}),
      single_pair_prediction(graphs[1], {0.0, 0.9, 0.1}),
  };
  TripletCounts counts;
  SuiteOptions opt;
  opt.ks = {1};
  const MetricReport report = recall_suite(preds, graphs, counts, opt);
  CHECK(report.value_of("R", 1, "unconstrained") == doctest::Approx(0.5));
}

TEST_CASE("prediction JSONL and report CSV round trips") {
  std::mt19937_64 rng(97);
  std::vector<SceneGraph> graphs;
  std::vector<Prediction> preds;
  for (int i = 0; i < 4; ++i) {
    graphs.push_back(testutil::random_graph(rng, "g" + std::to_string(i), 4, 4, 3, 0.5));
    preds.push_back(testutil::random_prediction(rng, graphs.back(), 4, 3));
  }
  write_predictions_jsonl("preds_io.jsonl", preds);
  const auto back = read_predictions_jsonl("preds_io.jsonl");
  REQUIRE(back.size() == preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(back[i].graph_id == preds[i].graph_id);
    CHECK(back[i].node_probs == preds[i].node_probs);
    CHECK(back[i].pair_probs == preds[i].pair_probs);
  }
  std::remove("preds_io.jsonl");

  TripletCounts counts;
  SuiteOptions opt;
  opt.ks = {1, 5};
  const MetricReport report = recall_suite(preds, graphs, counts, opt);
  const MetricReport parsed = report_from_csv(report_to_csv(report));
  REQUIRE(parsed.rows.size() == report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(parsed.rows[i].metric == report.rows[i].metric);
    CHECK(parsed.rows[i].k == report.rows[i].k);
    CHECK(parsed.rows[i].variant == report.rows[i].variant);
    CHECK(parsed.rows[i].value == report.rows[i].value);
    CHECK(parsed.rows[i].count == report.rows[i].count);
  }
}
