#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "whitebait/models.hpp"
#include "whitebait/train.hpp"

namespace whitebait {

// A model bundle is a directory holding
//   manifest.json      architecture + preprocessing (max_len, vocab files, bins)
//   params.bin         parameters and batchnorm statistics (params_io format)
//   vocab_<source>.txt one vocabulary per text source
//   config.txt         key=value echo of the training configuration
//   history.tsv        per-epoch losses (written by training)
struct LoadedBundle {
  enum class Kind { submodel, fusion };

  Kind kind = Kind::submodel;
  std::unique_ptr<Model> model;
  Preprocessor preprocessor;

  Submodel& submodel() { return static_cast<Submodel&>(*model); }
  FusionModel& fusion() { return static_cast<FusionModel&>(*model); }
};

// Key/value lines echoed into config.txt, in insertion order.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void save_submodel_bundle(const std::filesystem::path& dir, Submodel& model, const Preprocessor& prep,
                          const ConfigEcho& config);
void save_fusion_bundle(const std::filesystem::path& dir, FusionModel& model, const Preprocessor& prep,
                        const ConfigEcho& config);
void save_history(const std::filesystem::path& path, const TrainResult& result);

// Throws InputError naming the missing or inconsistent file.
LoadedBundle load_bundle(const std::filesystem::path& dir);

}  // namespace whitebait
