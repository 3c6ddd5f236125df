#include "whitebait/bundle.hpp"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "whitebait/error.hpp"
#include "whitebait/params_io.hpp"

namespace whitebait {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kBundleVersion = 1;

std::string vocab_file(SourceKind kind) { return std::string("vocab_") + to_string(kind) + ".txt"; }

ordered_json submodel_entry(const Submodel& m, const Preprocessor& prep) {
  const auto& s = m.spec();
  ordered_json j;
  j["source"] = to_string(s.kind);
  j["vocab_size"] = s.vocab_size;
  j["embed_dim"] = s.embed_dim;
  j["hidden_dim"] = s.hidden_dim;
  j["dense_dim"] = s.dense_dim;
  j["dropout"] = s.dropout_rate;
  if (is_text_source(s.kind)) {
    j["max_len"] = prep.config(s.kind).max_len;
    j["vocab_file"] = vocab_file(s.kind);
  } else {
    j["time_bins"] = kTimeBins;
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

void write_common(const fs::path& dir, Model& model, const Preprocessor& prep, const ordered_json& manifest,
                  const ConfigEcho& config) {
  fs::create_directories(dir);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  save_tensors(dir / "params.bin", model_state(model));
  for (auto kind : prep.sources())
    if (is_text_source(kind)) prep.config(kind).vocab.save(dir / vocab_file(kind));
  std::string echo;
  for (const auto& [k, v] : config) echo += k + "=" + v + "\n";
  write_text(dir / "config.txt", echo);
}

SubmodelSpec spec_from(const ordered_json& j) {
  SubmodelSpec s;
  auto kind = parse_source(j.at("source").get<std::string>());
  if (!kind) throw InputError("unknown source in manifest: " + j.at("source").get<std::string>());
  s.kind = *kind;
  s.vocab_size = j.at("vocab_size").get<std::size_t>();
  s.embed_dim = j.at("embed_dim").get<std::size_t>();
  s.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  s.dense_dim = j.at("dense_dim").get<std::size_t>();
  s.dropout_rate = j.at("dropout").get<double>();
  if (is_text_source(s.kind)) s.max_len = j.at("max_len").get<std::size_t>();
  return s;
}

}  // namespace

void save_submodel_bundle(const fs::path& dir, Submodel& model, const Preprocessor& prep, const ConfigEcho& config) {
  ordered_json manifest;
  manifest["format"] = "whitebait-bundle";
  manifest["version"] = kBundleVersion;
  manifest["kind"] = "submodel";
  manifest["submodels"] = ordered_json::array({submodel_entry(model, prep)});
  manifest["params_file"] = "params.bin";
  write_common(dir, model, prep, manifest, config);
}

void save_fusion_bundle(const fs::path& dir, FusionModel& model, const Preprocessor& prep, const ConfigEcho& config) {
  ordered_json manifest;
  manifest["format"] = "whitebait-bundle";
  manifest["version"] = kBundleVersion;
  manifest["kind"] = "fusion";
  ordered_json subs = ordered_json::array();
  for (const auto& sub : model.submodels()) subs.push_back(submodel_entry(sub, prep));
  manifest["submodels"] = subs;
  const auto& fs_spec = model.spec();
  manifest["fusion"] = {{"dense_dim", fs_spec.fusion_dense_dim},
                        {"dropout", fs_spec.dropout_rate},
                        {"fine_tune", fs_spec.fine_tune},
                        {"submodel_lr_scale", fs_spec.submodel_lr_scale}};
  manifest["params_file"] = "params.bin";
  write_common(dir, model, prep, manifest, config);
}

void save_history(const fs::path& path, const TrainResult& result) {
  std::string text = "epoch\ttrain_loss\tval_loss\tlearning_rate\n";
  for (const auto& e : result.schedule.history)
    text += fmt::format("{}\t{:.17g}\t{:.17g}\t{:.17g}\n", e.epoch, e.train_loss, e.val_loss, e.learning_rate);
  text += fmt::format("# best_epoch={} best_val_loss={:.17g} n_train={} n_validation={} stop={}\n",
                      result.schedule.best_epoch, result.schedule.best_val_loss, result.n_train,
                      result.n_validation,
                      result.schedule.stop_reason == ScheduleResult::Stop::min_lr ? "min_lr" : "max_epochs");
  write_text(path, text);
}

LoadedBundle load_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw InputError("missing bundle file " + manifest_path.string());
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    throw InputError("malformed " + manifest_path.string() + ": " + e.what());
  }

  LoadedBundle bundle;
  try {
    if (manifest.at("format") != "whitebait-bundle" || manifest.at("version") != kBundleVersion)
      throw InputError("unsupported bundle format in " + manifest_path.string());
    const std::string kind = manifest.at("kind").get<std::string>();
    std::vector<Submodel> subs;
    Rng scratch(0);
    for (const auto& entry : manifest.at("submodels")) {
      SubmodelSpec spec = spec_from(entry);
      Preprocessor::SourceConfig cfg;
      if (is_text_source(spec.kind)) {
        const fs::path vpath = dir / entry.at("vocab_file").get<std::string>();
        if (!fs::exists(vpath)) throw InputError("missing bundle file " + vpath.string());
        cfg.vocab = Vocabulary::load(vpath);
        cfg.max_len = spec.max_len;
        if (cfg.vocab.size() != spec.vocab_size)
          throw InputError("vocabulary " + vpath.string() + " does not match the manifest's vocab_size");
      }
      bundle.preprocessor.add_source(spec.kind, std::move(cfg));
      subs.push_back(build_submodel(spec, scratch));
    }
    if (kind == "submodel") {
      if (subs.size() != 1) throw InputError("submodel bundle must describe exactly one submodel");
      bundle.kind = LoadedBundle::Kind::submodel;
      bundle.model = std::make_unique<Submodel>(std::move(subs.front()));
    } else if (kind == "fusion") {
      const auto& f = manifest.at("fusion");
      FusionSpec spec;
      spec.fusion_dense_dim = f.at("dense_dim").get<std::size_t>();
      spec.dropout_rate = f.at("dropout").get<double>();
      spec.fine_tune = f.at("fine_tune").get<bool>();
      spec.submodel_lr_scale = f.at("submodel_lr_scale").get<double>();
      bundle.kind = LoadedBundle::Kind::fusion;
      bundle.model = std::make_unique<FusionModel>(std::move(subs), spec, scratch);
    } else {
      throw InputError("unknown bundle kind '" + kind + "'");
    }
  } catch (const ordered_json::exception& e) {
    throw InputError("invalid manifest " + manifest_path.string() + ": " + e.what());
  }

  const fs::path params_path = dir / "params.bin";
  if (!fs::exists(params_path)) throw InputError("missing bundle file " + params_path.string());
  load_model_state(*bundle.model, load_tensors(params_path));
  return bundle;
}

}  // namespace whitebait
