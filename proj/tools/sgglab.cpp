// sgglab: a desk-scale scene-graph-generation lab.
//
// Subcommands:
//   gen     synthesize a train/test dataset (graphs, features, manifest)
//   train   fit the linear classifier under a configurable edge loss
//   eval    compute the recall metric suite for a checkpoint, stored
//           predictions, or the frequency baseline
//   stats   dataset statistics (node counts, densities, zero-shots)
//   report  join metric reports and compute deltas against the first run
//
// Exit codes: 0 success, 2 usage/config error, 1 runtime failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sgg/core.hpp"
#include "sgg/freq.hpp"
#include "sgg/losses.hpp"
#include "sgg/metrics.hpp"
#include "sgg/model.hpp"
#include "sgg/synth.hpp"

namespace fs = std::filesystem;
using namespace sgg;

namespace {

// Configuration problems detected after CLI11 parsing; mapped to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string csv_cell(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string profile = "vg";
  std::size_t train_images = 200;
  std::size_t test_images = 100;
  std::uint64_t seed = 0;
  int c_obj = 16;
  int c_pred = 8;
  double zipf = 1.0;
  double holdout = 0.1;
  int n_min = 4;
  int n_max = 24;
  double n_skew = 0.0;
  std::size_t feature_dim = 8;
  double noise = 0.05;
  std::string out_dir = ".";
};

int run_gen(const GenOptions& o) {
  WorldConfig cfg;
  try {
    cfg.profile = profile_from_string(o.profile);
    cfg.c_obj = o.c_obj;
    cfg.c_pred = o.c_pred;
    cfg.zipf_exponent = o.zipf;
    cfg.holdout_fraction = o.holdout;
    cfg.n_dist = {o.n_min, o.n_max, o.n_skew};
    cfg.feature_dim = o.feature_dim;
    cfg.noise_scale = o.noise;
    cfg.seed = o.seed;
    validate_world_config(cfg);
    if (o.train_images < 1 || o.test_images < 1) {
      throw ValidationError("--train and --test must be >= 1");
    }
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  fs::create_directories(o.out_dir);
  const World world = make_world(cfg);
  const Dataset ds = make_dataset(world, o.train_images, o.test_images);

  const fs::path out(o.out_dir);
  write_graphs_jsonl((out / "train_graphs.jsonl").string(), ds.train.graphs);
  write_features_jsonl((out / "train_features.jsonl").string(), ds.train.graphs,
                       ds.train.features);
  write_graphs_jsonl((out / "test_graphs.jsonl").string(), ds.test.graphs);
  write_features_jsonl((out / "test_features.jsonl").string(), ds.test.graphs,
                       ds.test.features);
  const std::string manifest = ds.manifest.to_json();
  write_text((out / "manifest.json").string(), manifest + "\n");
  std::cout << manifest << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string graphs;
  std::string features;
  std::string val_graphs;
  std::string val_features;
  std::string task = "predcls";
  std::string loss = "baseline";
  double gamma = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 1.0;
  double lr = 0.1;
  int epochs = 10;
  int batch_size = 6;
  std::string edge_sample;
  std::uint64_t seed = 0;
  std::string freq_bias = "off";
  double freq_smoothing = 1.0;
  int min_nodes = 0;
  int max_nodes = 0;
  bool no_skip_degenerate = false;
  std::string checkpoint_out = "checkpoint.json";
  std::string history_out = "history.csv";
};

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream ss;
  ss << "epoch,l_node,l_fg,l_bg,density,sampled_fg,sampled_bg,"
        "degenerate_batches,val_node_acc,val_fg_acc\n";
  for (const EpochStats& e : history) {
    ss << e.epoch << ',' << csv_cell(e.l_node) << ',' << csv_cell(e.l_fg) << ','
       << csv_cell(e.l_bg) << ',' << csv_cell(e.density) << ',' << csv_cell(e.sampled_fg)
       << ',' << csv_cell(e.sampled_bg) << ',' << e.degenerate_batches << ',';
    if (e.val_node_accuracy) ss << csv_cell(*e.val_node_accuracy);
    ss << ',';
    if (e.val_fg_accuracy) ss << csv_cell(*e.val_fg_accuracy);
    ss << '\n';
  }
  return ss.str();
}

int run_train(const TrainOptions& o) {
  TrainConfig cfg;
  try {
    cfg.task = task_from_string(o.task);
    cfg.loss.variant = loss_variant_from_string(o.loss);
    cfg.loss.gamma = o.gamma;
    cfg.loss.alpha = o.alpha;
    cfg.loss.beta = o.beta;
    cfg.loss.lambda = o.lambda;
    validate_loss_config(cfg.loss);
    cfg.learning_rate = o.lr;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.seed = o.seed;
    cfg.freq_bias = o.freq_bias == "on";
    cfg.freq_smoothing = o.freq_smoothing;
    cfg.skip_degenerate = !o.no_skip_degenerate;
    if (o.lr <= 0 || o.epochs < 0 || o.batch_size < 1) {
      throw ValidationError("--lr must be > 0, --epochs >= 0, --batch-size >= 1");
    }
    if (o.freq_bias != "on" && o.freq_bias != "off") {
      throw ValidationError("--freq-bias must be on or off");
    }
    if (!o.edge_sample.empty()) {
      const auto colon = o.edge_sample.find(':');
      if (colon == std::string::npos) {
        throw ValidationError("--edge-sample expects FG:BG, e.g. 32:256");
      }
      try {
        cfg.edge_sampling = {{std::stoull(o.edge_sample.substr(0, colon)),
                              std::stoull(o.edge_sample.substr(colon + 1))}};
      } catch (const std::exception&) {
        throw ValidationError("--edge-sample expects FG:BG, e.g. 32:256");
      }
    }
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  std::vector<SceneGraph> graphs = read_graphs_jsonl(o.graphs);
  std::vector<FeatureBundle> features =
      align_features(graphs, read_features_jsonl(o.features));

  if (o.min_nodes > 0 || o.max_nodes > 0) {
    std::vector<SceneGraph> kept_g;
    std::vector<FeatureBundle> kept_f;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const int n = static_cast<int>(graphs[i].node_count());
      if (o.min_nodes > 0 && n < o.min_nodes) continue;
      if (o.max_nodes > 0 && n > o.max_nodes) continue;
      kept_g.push_back(std::move(graphs[i]));
      kept_f.push_back(std::move(features[i]));
    }
    graphs = std::move(kept_g);
    features = std::move(kept_f);
    if (graphs.empty()) {
      throw Error("node-count filter removed every training graph");
    }
  }

  std::optional<std::vector<SceneGraph>> val_graphs;
  std::optional<std::vector<FeatureBundle>> val_features;
  if (!o.val_graphs.empty()) {
    if (o.val_features.empty()) {
      throw ConfigError("--val-graphs requires --val-features");
    }
    val_graphs = read_graphs_jsonl(o.val_graphs);
    val_features = align_features(*val_graphs, read_features_jsonl(o.val_features));
  }

  const TrainResult result =
      train(graphs, features, cfg, val_graphs ? &*val_graphs : nullptr,
            val_features ? &*val_features : nullptr);

  nlohmann::json echo;
  echo["loss"] = o.loss;
  echo["gamma"] = o.gamma;
  echo["alpha"] = o.alpha;
  echo["beta"] = o.beta;
  echo["lambda"] = o.lambda;
  echo["lr"] = o.lr;
  echo["epochs"] = o.epochs;
  echo["batch_size"] = o.batch_size;
  echo["seed"] = o.seed;
  echo["task"] = o.task;
  echo["freq_bias"] = cfg.freq_bias;
  echo["freq_smoothing"] = o.freq_smoothing;
  echo["edge_sample"] = o.edge_sample;
  echo["min_nodes"] = o.min_nodes;
  echo["max_nodes"] = o.max_nodes;
  save_checkpoint(o.checkpoint_out, result.model, cfg.task, echo.dump());
  write_text(o.history_out, history_csv(result.history));
  std::cout << "checkpoint: " << o.checkpoint_out << "\n"
            << "history: " << o.history_out << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string graphs;
  std::string features;
  std::string checkpoint;
  std::string predictions;
  std::string predictor;
  std::string train_graphs;
  std::string counts_file;
  std::string task;
  std::vector<int> ks;
  std::vector<std::int64_t> nshots;
  bool constrained = false;
  double freq_smoothing = 1.0;
  std::string out_csv;
  std::string out_json;
};

std::vector<Prediction> freq_predictions(const std::vector<SceneGraph>& graphs,
                                         const std::vector<SceneGraph>& train,
                                         double smoothing) {
  int c_obj = 0;
  int c_pred = 0;
  for (const std::vector<SceneGraph>* set : {&graphs, &train}) {
    for (const SceneGraph& g : *set) {
      for (ClassId c : g.nodes) c_obj = std::max(c_obj, c + 1);
      for (const FgEdge& e : g.fg_edges) c_pred = std::max(c_pred, e.predicate);
    }
  }
  const FreqModel model = fit_freq(train, smoothing, c_pred);

  std::vector<Prediction> preds;
  preds.reserve(graphs.size());
  for (const SceneGraph& g : graphs) {
    preds.push_back(freq_baseline_prediction(model, g, c_obj));
  }
  return preds;
}

int run_eval(const EvalOptions& o) {
  const int sources =
      (!o.checkpoint.empty()) + (!o.predictions.empty()) + (!o.predictor.empty());
  if (sources != 1) {
    throw ConfigError("pick exactly one of --checkpoint, --predictions, --predictor");
  }
  if (!o.predictor.empty() && o.predictor != "freq") {
    throw ConfigError("unknown predictor: " + o.predictor);
  }
  if (o.counts_file.empty() && o.train_graphs.empty()) {
    throw ConfigError("zero-shot metrics need --counts or --train-graphs");
  }
  for (int k : o.ks) {
    if (k < 1) throw ConfigError("--k values must be >= 1");
  }
  for (std::int64_t n : o.nshots) {
    if (n < 0) throw ConfigError("--nshot values must be >= 0");
  }

  const std::vector<SceneGraph> graphs = read_graphs_jsonl(o.graphs);
  std::optional<std::vector<SceneGraph>> train;
  if (!o.train_graphs.empty()) {
    train = read_graphs_jsonl(o.train_graphs);
  }
  const TripletCounts counts =
      !o.counts_file.empty() ? load_triplet_counts(o.counts_file) : triplet_counts(*train);

  SuiteOptions suite;
  suite.ks = o.ks.empty() ? std::vector<int>{50} : o.ks;
  suite.constrained_variant = o.constrained;
  std::set<std::int64_t> ns(o.nshots.begin(), o.nshots.end());
  ns.insert(0);
  suite.nshots.assign(ns.begin(), ns.end());

  std::vector<Prediction> preds;
  if (!o.predictions.empty()) {
    try {
      suite.task = task_from_string(o.task.empty() ? "predcls" : o.task);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    preds = read_predictions_jsonl(o.predictions);
  } else if (!o.checkpoint.empty()) {
    if (o.features.empty()) {
      throw ConfigError("--checkpoint evaluation needs --features");
    }
    const Checkpoint ck = load_checkpoint(o.checkpoint);
    try {
      suite.task = o.task.empty() ? ck.task : task_from_string(o.task);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    const std::vector<FeatureBundle> features =
        align_features(graphs, read_features_jsonl(o.features));
    preds.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      preds.push_back(forward(ck.model, graphs[i], features[i], suite.task));
    }
  } else {
    if (!o.task.empty() && o.task != "predcls") {
      throw ConfigError("--predictor freq supports only --task predcls");
    }
    suite.task = Task::PredCls;
    if (!train) {
      throw ConfigError("--predictor freq needs --train-graphs");
    }
    preds = freq_predictions(graphs, *train, o.freq_smoothing);
  }

  const MetricReport report = recall_suite(preds, graphs, counts, suite);
  const std::string csv = report_to_csv(report);
  std::cout << csv;
  if (!o.out_csv.empty()) write_text(o.out_csv, csv);
  if (!o.out_json.empty()) write_text(o.out_json, report_to_json(report) + "\n");
  return 0;
}

// ---------------------------------------------------------------- stats

struct StatsOptions {
  std::string graphs;
  std::string train_graphs;
  std::string counts_file;
  std::string format = "text";
  std::string out;
};

std::string stats_text(const StatsReport& r) {
  std::ostringstream ss;
  ss << "images                  " << r.image_count << "\n"
     << "triplets unique/total   " << r.unique_triplet_count << "/"
     << r.total_triplet_count << "\n"
     << "N min-max               " << r.n_min << "-" << r.n_max << "\n"
     << "N mean/std              " << r.n_mean << "/" << r.n_std << "\n"
     << "d min-max               " << r.d_min << "-" << r.d_max << "\n"
     << "d mean/std              " << r.d_mean << "/" << r.d_std << "\n";
  if (r.zs_unique) {
    ss << "zero-shot unique/total  " << *r.zs_unique << "/" << *r.zs_total << "\n";
  }
  return ss.str();
}

std::string stats_csv(const StatsReport& r) {
  std::ostringstream ss;
  ss << "field,value\n"
     << "image_count," << r.image_count << "\n"
     << "unique_triplet_count," << r.unique_triplet_count << "\n"
     << "total_triplet_count," << r.total_triplet_count << "\n"
     << "n_min," << csv_cell(r.n_min) << "\n"
     << "n_max," << csv_cell(r.n_max) << "\n"
     << "n_mean," << csv_cell(r.n_mean) << "\n"
     << "n_std," << csv_cell(r.n_std) << "\n"
     << "d_min," << csv_cell(r.d_min) << "\n"
     << "d_max," << csv_cell(r.d_max) << "\n"
     << "d_mean," << csv_cell(r.d_mean) << "\n"
     << "d_std," << csv_cell(r.d_std) << "\n";
  if (r.zs_unique) {
    ss << "zs_unique," << *r.zs_unique << "\n"
       << "zs_total," << *r.zs_total << "\n";
  }
  return ss.str();
}

int run_stats(const StatsOptions& o) {
  if (o.format != "text" && o.format != "csv") {
    throw ConfigError("--format must be text or csv");
  }
  const std::vector<SceneGraph> graphs = read_graphs_jsonl(o.graphs);
  std::optional<TripletCounts> counts;
  if (!o.counts_file.empty()) {
    counts = load_triplet_counts(o.counts_file);
  } else if (!o.train_graphs.empty()) {
    counts = triplet_counts(read_graphs_jsonl(o.train_graphs));
  }
  const StatsReport r = dataset_stats(graphs, counts ? &*counts : nullptr);
  const std::string text = o.format == "csv" ? stats_csv(r) : stats_text(r);
  std::cout << text;
  if (!o.out.empty()) write_text(o.out, text);
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::string> files;
  std::string out;
};

int run_report(const ReportOptions& o) {
  if (o.files.size() < 2) {
    throw ConfigError("report needs at least two metric CSV files");
  }
  std::vector<MetricReport> reports;
  std::vector<std::string> names;
  for (const std::string& f : o.files) {
    reports.push_back(report_from_csv(slurp(f)));
    names.push_back(fs::path(f).stem().string());
  }
  const MetricReport& base = reports[0];
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].rows.size() != base.rows.size()) {
      throw Error("schema mismatch: " + o.files[i] + " has a different row set");
    }
    for (std::size_t r = 0; r < base.rows.size(); ++r) {
      const MetricRow& a = base.rows[r];
      const MetricRow& b = reports[i].rows[r];
      if (a.metric != b.metric || a.k != b.k || a.variant != b.variant) {
        throw Error("schema mismatch: " + o.files[i] + " row " + std::to_string(r) +
                    " differs");
      }
    }
  }

  std::ostringstream ss;
  ss << "metric,K,variant";
  for (const std::string& n : names) ss << ',' << n;
  for (std::size_t i = 1; i < names.size(); ++i) ss << ",delta_" << names[i];
  ss << '\n';
  for (std::size_t r = 0; r < base.rows.size(); ++r) {
    const MetricRow& a = base.rows[r];
    ss << a.metric << ',' << a.k << ',' << a.variant;
    for (const MetricReport& rep : reports) ss << ',' << csv_cell(rep.rows[r].value);
    for (std::size_t i = 1; i < reports.size(); ++i) {
      ss << ',' << csv_cell(reports[i].rows[r].value - a.value);
    }
    ss << '\n';
  }
  std::cout << ss.str();
  if (!o.out.empty()) write_text(o.out, ss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sgglab: a desk-scale scene-graph-generation lab"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
  gen_cmd->add_option("--profile", gen.profile, "density profile: vg or gqa");
  gen_cmd->add_option("--train", gen.train_images, "number of training images");
  gen_cmd->add_option("--test", gen.test_images, "number of test images");
  gen_cmd->add_option("--seed", gen.seed, "world seed");
  gen_cmd->add_option("--c-obj", gen.c_obj, "object classes");
  gen_cmd->add_option("--c-pred", gen.c_pred, "predicate classes");
  gen_cmd->add_option("--zipf", gen.zipf, "long-tail exponent");
  gen_cmd->add_option("--holdout", gen.holdout, "zero-shot holdout fraction [0, 0.5]");
  gen_cmd->add_option("--n-min", gen.n_min, "smallest graph size");
  gen_cmd->add_option("--n-max", gen.n_max, "largest graph size");
  gen_cmd->add_option("--n-skew", gen.n_skew, "graph-size skew (0 = uniform)");
  gen_cmd->add_option("--feature-dim", gen.feature_dim, "embedding dimension");
  gen_cmd->add_option("--noise", gen.noise, "feature noise scale");
  gen_cmd->add_option("--out", gen.out_dir, "output directory");

  TrainOptions tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train the linear classifier");
  train_cmd->add_option("--graphs", tr.graphs, "training graphs JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--features", tr.features, "training features JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--val-graphs", tr.val_graphs, "validation graphs JSONL")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--val-features", tr.val_features, "validation features JSONL")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--task", tr.task, "predcls or sgcls");
  train_cmd->add_option("--loss", tr.loss,
                        "baseline, normalized, tuned-ab or tuned-lambda");
  train_cmd->add_option("--gamma", tr.gamma, "normalized-loss scale");
  train_cmd->add_option("--alpha", tr.alpha, "tuned-ab FG scale");
  train_cmd->add_option("--beta", tr.beta, "tuned-ab BG scale");
  train_cmd->add_option("--lambda", tr.lambda, "tuned-lambda edge scale");
  train_cmd->add_option("--lr", tr.lr, "learning rate");
  train_cmd->add_option("--epochs", tr.epochs, "training epochs");
  train_cmd->add_option("--batch-size", tr.batch_size, "graphs per batch");
  train_cmd->add_option("--edge-sample", tr.edge_sample, "edge caps as FG:BG");
  train_cmd->add_option("--seed", tr.seed, "training seed");
  train_cmd->add_option("--freq-bias", tr.freq_bias, "add Freq logits: on or off");
  train_cmd->add_option("--freq-smoothing", tr.freq_smoothing,
                        "additive smoothing for the Freq bias");
  train_cmd->add_option("--min-nodes", tr.min_nodes, "keep graphs with N >= this");
  train_cmd->add_option("--max-nodes", tr.max_nodes, "keep graphs with N <= this");
  train_cmd->add_flag("--no-skip-degenerate", tr.no_skip_degenerate,
                      "fail on batches without FG edges instead of skipping");
  train_cmd->add_option("--checkpoint", tr.checkpoint_out, "checkpoint output path");
  train_cmd->add_option("--history", tr.history_out, "history CSV output path");

  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate predictions");
  eval_cmd->add_option("--graphs", ev.graphs, "test graphs JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--features", ev.features, "test features JSONL")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint to evaluate")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictions", ev.predictions, "stored predictions JSONL")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictor", ev.predictor, "built-in predictor: freq");
  eval_cmd->add_option("--train-graphs", ev.train_graphs,
                       "training graphs (triplet counts, Freq fit)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--counts", ev.counts_file, "triplet-count JSON file")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--task", ev.task, "predcls or sgcls");
  eval_cmd->add_option("--k", ev.ks, "recall cutoffs");
  eval_cmd->add_option("--nshot", ev.nshots, "extra n-shot thresholds (0 always runs)");
  eval_cmd->add_flag("--constrained", ev.constrained,
                     "also report graph-constrained variants");
  eval_cmd->add_option("--freq-smoothing", ev.freq_smoothing,
                       "smoothing for --predictor freq");
  eval_cmd->add_option("--out-csv", ev.out_csv, "write the report CSV here");
  eval_cmd->add_option("--out-json", ev.out_json, "write the report JSON here");

  StatsOptions st;
  CLI::App* stats_cmd = app.add_subcommand("stats", "dataset statistics");
  stats_cmd->add_option("--graphs", st.graphs, "graphs JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--train-graphs", st.train_graphs,
                        "training graphs for zero-shot counts")
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--counts", st.counts_file, "triplet-count JSON file")
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--format", st.format, "text or csv");
  stats_cmd->add_option("--out", st.out, "also write the output here");

  ReportOptions rp;
  CLI::App* report_cmd = app.add_subcommand("report", "join metric reports");
  report_cmd->add_option("files", rp.files, "metric CSV files (first = reference)")
      ->expected(-2)
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--out", rp.out, "write the joined CSV here");

  int rc = 0;
  gen_cmd->callback([&] { rc = run_gen(gen); });
  train_cmd->callback([&] { rc = run_train(tr); });
  eval_cmd->callback([&] { rc = run_eval(ev); });
  stats_cmd->callback([&] { rc = run_stats(st); });
  report_cmd->callback([&] { rc = run_report(rp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
