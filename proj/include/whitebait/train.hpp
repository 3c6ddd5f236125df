#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "whitebait/corpus.hpp"
#include "whitebait/models.hpp"
#include "whitebait/optim.hpp"
#include "whitebait/params_io.hpp"

namespace whitebait {

struct TrainConfig {
  std::size_t batch_size = 32;
  // Fraction of the (seeded-shuffled) training data held out for early
  // stopping. 0 validates on the training data itself.
  double validation_fraction = 0.1;
  std::uint64_t seed = 42;
  // Prefix of the named random streams used for epoch shuffling and dropout.
  // The train/validation split depends on the seed only, so every model
  // trained with one seed sees the same split.
  std::string stream = "train";
  TrainSchedule schedule;  // schedule.max_epochs defaults to 100
};

struct TrainResult {
  ScheduleResult schedule;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

// Minimizes MSE against `targets` with RMSProp, early stopping and LR decay.
// The model ends up holding its best-validation parameters and buffers.
// Throws InputError when fewer than two training examples remain (a
// batch-normalized batch needs two rows).
TrainResult train(Model& model, std::span<const Features> features, std::span<const double> targets,
                  const TrainConfig& config);
TrainResult train(Model& model, const Preprocessor& prep, const LabeledDataset& dataset, const TrainConfig& config);

// Inference-mode scores. `predict` fans chunks out over OpenMP threads;
// `predict_serial` is the single-threaded reference. Both return identical
// values.
std::vector<double> predict(Model& model, std::span<const Features> features, std::size_t chunk = 64);
std::vector<double> predict_serial(Model& model, std::span<const Features> features, std::size_t chunk = 64);
double predict(Model& model, const Preprocessor& prep, const Instance& instance);

double mean_squared_error(std::span<const double> preds, std::span<const double> targets);

// Snapshot of every parameter value and buffer, keyed by name.
std::vector<NamedTensor> model_state(Model& model);
// Strict restore: every name must be present with a matching shape.
void load_model_state(Model& model, const std::vector<NamedTensor>& state);

}  // namespace whitebait
