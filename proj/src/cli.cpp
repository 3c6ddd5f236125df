#include "whitebait/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "whitebait/bundle.hpp"
#include "whitebait/error.hpp"
#include "whitebait/log.hpp"
#include "whitebait/metrics.hpp"
#include "whitebait/train.hpp"

namespace whitebait {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct TrainOptions {
  std::string instances, truth, out_dir;
  std::string source;
  bool fusion = false;
  bool all = false;
  std::vector<std::string> combine;
  std::uint64_t seed = 42;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  std::size_t embed_dim = 100;
  std::size_t hidden_dim = 100;
  std::size_t dense_dim = 64;
  double dropout = 0.3;
  std::size_t min_freq = Vocabulary::default_min_freq;
  std::size_t max_len = 0;  // 0: per-source default
  bool freeze = false;
};

struct PredictOptions {
  std::string bundle, instances, out;
};

struct EvaluateOptions {
  std::string predictions, truth;
  double threshold = 0.5;
  std::string format = "json";
};

struct StatsOptions {
  std::vector<std::string> files;
};

LabeledDataset load_training_data(const TrainOptions& o) {
  LabeledDataset ds = load_dataset(o.instances, o.truth);
  if (!o.combine.empty()) {
    LabeledDataset extra = load_dataset(o.combine.at(0), o.combine.at(1));
    std::set<std::string> seen;
    for (const auto& ex : ds.examples) seen.insert(ex.instance.id);
    for (auto& ex : extra.examples) {
      if (!seen.insert(ex.instance.id).second)
        throw InputError("--combine: id " + ex.instance.id + " occurs in both datasets");
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

TrainConfig train_config(const TrainOptions& o, const std::string& stream) {
  TrainConfig c;
  c.batch_size = o.batch_size;
  c.validation_fraction = o.validation_fraction;
  c.seed = o.seed;
  c.stream = stream;
  c.schedule.max_epochs = o.epochs;
  return c;
}

ConfigEcho echo(const TrainOptions& o, const std::string& what) {
  ConfigEcho e{{"model", what},
               {"instances", o.instances},
               {"truth", o.truth},
               {"seed", std::to_string(o.seed)},
               {"epochs", std::to_string(o.epochs)},
               {"batch_size", std::to_string(o.batch_size)},
               {"validation_fraction", fmt::format("{}", o.validation_fraction)},
               {"embed_dim", std::to_string(o.embed_dim)},
               {"hidden_dim", std::to_string(o.hidden_dim)},
               {"dense_dim", std::to_string(o.dense_dim)},
               {"dropout", fmt::format("{}", o.dropout)},
               {"min_freq", std::to_string(o.min_freq)}};
  if (!o.combine.empty()) e.emplace_back("combine", o.combine[0] + " " + o.combine[1]);
  if (o.max_len) e.emplace_back("max_len", std::to_string(o.max_len));
  if (what == "fusion") e.emplace_back("freeze", o.freeze ? "true" : "false");
  return e;
}

void train_submodel(SourceKind kind, const LabeledDataset& ds, const TrainOptions& o, std::ostream& out) {
  std::vector<Instance> instances;
  for (const auto& ex : ds.examples) instances.push_back(ex.instance);
  const SourceKind sources[] = {kind};
  std::map<SourceKind, std::size_t> overrides;
  if (o.max_len && is_text_source(kind)) overrides[kind] = o.max_len;
  Preprocessor prep = Preprocessor::fit(instances, sources, o.min_freq, overrides);

  SubmodelSpec spec;
  spec.kind = kind;
  spec.vocab_size = is_text_source(kind) ? prep.config(kind).vocab.size() : kTimeBins;
  spec.max_len = is_text_source(kind) ? prep.config(kind).max_len : 0;
  spec.embed_dim = o.embed_dim;
  spec.hidden_dim = o.hidden_dim;
  spec.dense_dim = o.dense_dim;
  spec.dropout_rate = o.dropout;
  Rng init = Rng::stream(o.seed, std::string(to_string(kind)) + "/init");
  Submodel model = build_submodel(spec, init);

  TrainResult result = train(model, prep, ds, train_config(o, to_string(kind)));
  const fs::path dir = fs::path(o.out_dir) / to_string(kind);
  save_submodel_bundle(dir, model, prep, echo(o, to_string(kind)));
  save_history(dir / "history.tsv", result);
  out << fmt::format("{}: best epoch {} val_mse {:.6f} -> {}\n", to_string(kind), result.schedule.best_epoch,
                     result.schedule.best_val_loss, dir.string());
}

void train_fusion(const LabeledDataset& ds, const TrainOptions& o, std::ostream& out) {
  std::vector<std::string> missing;
  for (auto kind : kAllSources)
    if (!fs::exists(fs::path(o.out_dir) / to_string(kind) / "manifest.json")) missing.push_back(to_string(kind));
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + (fs::path(o.out_dir) / m).string();
    throw InputError("--fusion needs trained submodel bundles; missing: " + names);
  }

  std::vector<Submodel> subs;
  Preprocessor prep;
  for (auto kind : kAllSources) {
    LoadedBundle b = load_bundle(fs::path(o.out_dir) / to_string(kind));
    if (b.kind != LoadedBundle::Kind::submodel || b.submodel().kind() != kind)
      throw InputError("bundle " + (fs::path(o.out_dir) / to_string(kind)).string() + " is not a " +
                       to_string(kind) + " submodel");
    prep.merge(b.preprocessor);
    subs.push_back(std::move(b.submodel()));
  }
  FusionSpec spec;
  spec.fusion_dense_dim = o.dense_dim;
  spec.dropout_rate = o.dropout;
  spec.fine_tune = !o.freeze;
  Rng init = Rng::stream(o.seed, "fusion/init");
  FusionModel model = build_fusion_model(std::move(subs), spec, init);

  TrainResult result = train(model, prep, ds, train_config(o, "fusion"));
  const fs::path dir = fs::path(o.out_dir) / "fusion";
  save_fusion_bundle(dir, model, prep, echo(o, "fusion"));
  save_history(dir / "history.tsv", result);
  out << fmt::format("fusion: best epoch {} val_mse {:.6f} -> {}\n", result.schedule.best_epoch,
                     result.schedule.best_val_loss, dir.string());
}

void cmd_train(const TrainOptions& o, std::ostream& out) {
  const int modes = int(!o.source.empty()) + int(o.fusion) + int(o.all);
  if (modes != 1) throw InputError("train: give exactly one of --source, --fusion, --all");
  LabeledDataset ds = load_training_data(o);
  if (o.all) {
    for (auto kind : kAllSources) train_submodel(kind, ds, o, out);
    train_fusion(ds, o, out);
  } else if (o.fusion) {
    train_fusion(ds, o, out);
  } else {
    auto kind = parse_source(o.source);
    if (!kind) throw InputError("unknown source '" + o.source + "'");
    train_submodel(*kind, ds, o, out);
  }
}

void cmd_predict(const PredictOptions& o) {
  LoadedBundle bundle = load_bundle(o.bundle);
  std::vector<Instance> instances = load_instances(o.instances);
  std::vector<Features> features = bundle.preprocessor.encode_all(instances);
  std::vector<double> scores = predict(*bundle.model, features);

  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw InputError("cannot write " + o.out);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
      throw NumericError("prediction for " + instances[i].id + " is outside [0,1]");
    ordered_json j;
    j["id"] = instances[i].id;
    // Written by hand below so the score keeps a fixed-point format.
    file << "{\"id\":" << j["id"].dump() << ",\"clickbaitScore\":" << fmt::format("{:.6f}", scores[i]) << "}\n";
  }
  if (!file) throw InputError("write failed: " + o.out);
}

std::vector<std::pair<std::string, double>> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::pair<std::string, double>> preds;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      double score = j.at("clickbaitScore").get<double>();
      if (!seen.insert(id).second) throw ParseError(path, lineno, "duplicate prediction id " + id);
      preds.emplace_back(std::move(id), score);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return preds;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : std::string("-"); }

void cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  auto preds = load_predictions(o.predictions);
  auto truth = load_truth(o.truth);
  std::vector<double> scores;
  std::vector<Truth> gold;
  for (const auto& [id, score] : preds) {
    auto it = truth.find(id);
    if (it == truth.end()) throw InputError("prediction id " + id + " has no truth record in " + o.truth);
    scores.push_back(score);
    gold.push_back(it->second);
  }
  MetricsReport r = evaluate(scores, gold, o.threshold);
  if (o.format == "table") {
    out << fmt::format("{:<10}{}\n", "metric", "value");
    out << fmt::format("{:<10}{:.4f}\n", "mse", r.mse);
    out << fmt::format("{:<10}{:.4f}\n", "mae", r.mae);
    out << fmt::format("{:<10}{:.4f}\n", "acc", r.accuracy);
    out << fmt::format("{:<10}{}\n", "f1", fmt_opt(r.f1));
    out << fmt::format("{:<10}{}\n", "precision", fmt_opt(r.precision));
    out << fmt::format("{:<10}{}\n", "recall", fmt_opt(r.recall));
    out << fmt::format("{:<10}{}\n", "n", r.n);
    out << fmt::format("{:<10}tp={} fp={} fn={} tn={}\n", "confusion", r.confusion.tp, r.confusion.fp,
                       r.confusion.fn, r.confusion.tn);
  } else {
    out << r.to_json() << "\n";
  }
}

ordered_json stats_json(const LabeledDataset& ds, const std::string& name) {
  DatasetStats s = dataset_stats(ds);
  ordered_json j;
  j["name"] = name;
  j["n_total"] = s.n_total;
  j["n_clickbait"] = s.n_clickbait;
  j["n_no_clickbait"] = s.n_no_clickbait;
  j["mean_score"] = s.mean_score;
  ordered_json hist;
  for (std::size_t i = 0; i < kJudgmentLevels.size(); ++i)
    hist[fmt::format("{}", kJudgmentLevels[i])] = s.score_histogram[i];
  j["score_histogram"] = hist;
  return j;
}

void cmd_stats(const StatsOptions& o, std::ostream& out) {
  if (o.files.size() != 2 && o.files.size() != 4)
    throw InputError("stats: expected <instances> <truth> [<instances2> <truth2>]");
  ordered_json j;
  j["datasets"] = ordered_json::array();
  std::vector<std::vector<double>> samples;
  for (std::size_t i = 0; i < o.files.size(); i += 2) {
    LabeledDataset ds = load_dataset(o.files[i], o.files[i + 1]);
    j["datasets"].push_back(stats_json(ds, o.files[i]));
    std::vector<double> means;
    for (const auto& ex : ds.examples) means.push_back(ex.truth.mean);
    samples.push_back(std::move(means));
  }
  if (samples.size() == 2) {
    MannWhitneyResult mw = mann_whitney_u(samples[0], samples[1]);
    j["mann_whitney"] = {{"u_a", mw.u_a},
                         {"u_b", mw.u_b},
                         {"z", mw.z},
                         {"p_two_sided", mw.p_two_sided},
                         {"method", to_string(mw.method)}};
  }
  out << j.dump(2) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clickbait strength regression: train, predict, evaluate, stats", "whitebait"};
  app.require_subcommand(1);

  TrainOptions t;
  auto* train_cmd = app.add_subcommand("train", "Train a submodel (--source), the fusion model (--fusion) or both (--all)");
  train_cmd->add_option("instances", t.instances, "Instances JSONL")->required();
  train_cmd->add_option("truth", t.truth, "Truth JSONL")->required();
  train_cmd->add_option("out_dir", t.out_dir, "Directory receiving <source>/ and fusion/ bundles")->required();
  train_cmd->add_option("--source", t.source, "post_text, post_time, target_title, target_description, "
                                              "target_keywords or target_paragraphs");
  train_cmd->add_flag("--fusion", t.fusion, "Train the fusion model from six submodel bundles in out_dir");
  train_cmd->add_flag("--all", t.all, "Train all six submodels, then the fusion model");
  train_cmd->add_option("--combine", t.combine, "Second <instances> <truth> pair appended to the training data")
      ->expected(2);
  train_cmd->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--epochs", t.epochs, "Maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", t.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  train_cmd->add_option("--validation-fraction", t.validation_fraction, "Held-out fraction for early stopping")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.99));
  train_cmd->add_option("--embed-dim", t.embed_dim)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden-dim", t.hidden_dim)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--dense-dim", t.dense_dim)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", t.dropout)->capture_default_str()->check(CLI::Range(0.0, 0.95));
  train_cmd->add_option("--min-freq", t.min_freq, "Minimum token count for the vocabulary")->capture_default_str();
  train_cmd->add_option("--max-len", t.max_len, "Sequence length override for text sources");
  train_cmd->add_flag("--freeze", t.freeze, "Keep submodel weights fixed while training the fusion model");

  PredictOptions p;
  auto* predict_cmd = app.add_subcommand("predict", "Score instances with a model bundle");
  predict_cmd->add_option("bundle", p.bundle, "Bundle directory")->required();
  predict_cmd->add_option("instances", p.instances, "Instances JSONL")->required();
  predict_cmd->add_option("out", p.out, "Output predictions JSONL")->required();

  EvaluateOptions e;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare predictions with truth");
  evaluate_cmd->add_option("predictions", e.predictions, "Predictions JSONL")->required();
  evaluate_cmd->add_option("truth", e.truth, "Truth JSONL")->required();
  evaluate_cmd->add_option("--threshold", e.threshold, "Score above which an instance counts as clickbait")
      ->capture_default_str();
  evaluate_cmd->add_option("--format", e.format)->capture_default_str()->check(CLI::IsMember({"json", "table"}));

  StatsOptions s;
  auto* stats_cmd = app.add_subcommand("stats", "Label statistics, with a Mann-Whitney test for two datasets");
  stats_cmd->add_option("files", s.files, "<instances> <truth> [<instances2> <truth2>]")->required();

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    std::ostringstream o, e2;
    const int code = app.exit(pe, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (train_cmd->parsed()) cmd_train(t, out);
    else if (predict_cmd->parsed()) cmd_predict(p);
    else if (evaluate_cmd->parsed()) cmd_evaluate(e, out);
    else if (stats_cmd->parsed()) cmd_stats(s, out);
    return kExitOk;
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInputError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace whitebait
