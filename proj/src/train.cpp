#include "whitebait/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "whitebait/error.hpp"
#include "whitebait/log.hpp"
#include "whitebait/ops.hpp"

namespace whitebait {

namespace {

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  // A trailing single row cannot be batch-normalized; fold it into the
  // previous batch.
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

std::vector<double> predict_range(Model& model, std::span<const Features> features, std::size_t begin,
                                  std::size_t end) {
  std::vector<const Features*> batch;
  for (std::size_t i = begin; i < end; ++i) batch.push_back(&features[i]);
  Tape tape;
  Rng unused(0);
  Var out = model.forward(tape, batch, Mode::infer, unused);
  const auto& v = tape.value(out).values();
  return {v.begin(), v.end()};
}

}  // namespace

double mean_squared_error(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size() || preds.empty()) throw InputError("mean_squared_error: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  return s / static_cast<double>(preds.size());
}

std::vector<double> predict_serial(Model& model, std::span<const Features> features, std::size_t chunk) {
  std::vector<double> out(features.size());
  for (std::size_t start = 0; start < features.size(); start += chunk) {
    std::size_t end = std::min(features.size(), start + chunk);
    auto part = predict_range(model, features, start, end);
    std::copy(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return out;
}

std::vector<double> predict(Model& model, std::span<const Features> features, std::size_t chunk) {
  std::vector<double> out(features.size());
  const auto n_chunks = static_cast<std::int64_t>((features.size() + chunk - 1) / chunk);
  // Inference reads parameters only, so chunks are independent.
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const std::size_t start = static_cast<std::size_t>(c) * chunk;
    const std::size_t end = std::min(features.size(), start + chunk);
    auto part = predict_range(model, features, start, end);
    std::copy(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return out;
}

double predict(Model& model, const Preprocessor& prep, const Instance& instance) {
  Features f = prep.encode(instance);
  return predict_serial(model, std::span<const Features>(&f, 1)).front();
}

std::vector<NamedTensor> model_state(Model& model) {
  std::vector<NamedTensor> state;
  for (auto* p : model.parameters()) state.push_back({p->name, p->value});
  for (auto& b : model.buffers()) state.push_back({b.name, Tensor({b.values->size()}, *b.values)});
  return state;
}

void load_model_state(Model& model, const std::vector<NamedTensor>& state) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& t : state)
    if (!by_name.emplace(t.name, &t.value).second) throw InputError("duplicate tensor " + t.name);
  std::size_t used = 0;
  auto fetch = [&](const std::string& name, const Shape& shape) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw InputError("missing tensor " + name);
    if (it->second->shape() != shape)
      throw InputError("tensor " + name + " has shape " + shape_string(it->second->shape()) + ", expected " +
                       shape_string(shape));
    ++used;
    return *it->second;
  };
  for (auto* p : model.parameters()) p->value = fetch(p->name, p->value.shape());
  for (auto& b : model.buffers()) *b.values = fetch(b.name, {b.values->size()}).values();
  if (used != by_name.size()) throw InputError("state contains tensors the model does not use");
}

TrainResult train(Model& model, std::span<const Features> features, std::span<const double> targets,
                  const TrainConfig& config) {
  if (features.size() != targets.size()) throw InputError("features/targets size mismatch");
  if (features.empty()) throw InputError("cannot train on an empty dataset");
  if (config.batch_size < 2) throw InputError("batch_size must be >= 2");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0))
    throw InputError("validation_fraction must be in [0,1)");
  config.schedule.validate();

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = Rng::stream(config.seed, "split");
  split_rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  if (train_idx.size() < 2)
    throw InputError("dataset too small: " + std::to_string(train_idx.size()) +
                     " training example(s) after the validation split, need at least 2");
  if (val_idx.empty()) val_idx = train_idx;

  std::vector<Features> val_features;
  std::vector<double> val_targets;
  for (auto i : val_idx) {
    val_features.push_back(features[i]);
    val_targets.push_back(targets[i]);
  }

  const std::size_t batch_size = std::min(config.batch_size, train_idx.size());
  Rng epoch_rng = Rng::stream(config.seed, config.stream + "/epochs");
  Rng dropout_rng = Rng::stream(config.seed, config.stream + "/dropout");
  auto params = model.parameters();
  std::vector<NamedTensor> best_state;

  ScheduleHooks hooks;
  hooks.train_epoch = [&](std::size_t, double lr) {
    std::vector<std::size_t> shuffled = train_idx;
    epoch_rng.shuffle(shuffled);
    double total = 0.0;
    for (const auto& batch_idx : make_batches(shuffled, batch_size)) {
      std::vector<const Features*> batch;
      Tensor target({batch_idx.size(), 1});
      for (std::size_t r = 0; r < batch_idx.size(); ++r) {
        batch.push_back(&features[batch_idx[r]]);
        target[r] = targets[batch_idx[r]];
      }
      for (auto* p : params) p->zero_grad();
      Tape tape;
      Var pred = model.forward(tape, batch, Mode::train, dropout_rng);
      Var loss = ops::mse(tape, pred, tape.constant(std::move(target)));
      tape.backward(loss);
      for (auto* p : params) rmsprop_step(*p, config.schedule, lr);
      total += tape.value(loss)[0] * static_cast<double>(batch_idx.size());
    }
    return total / static_cast<double>(train_idx.size());
  };
  hooks.val_loss = [&] { return mean_squared_error(predict(model, val_features), val_targets); };
  hooks.on_best = [&](std::size_t) { best_state = model_state(model); };
  hooks.restore_best = [&](std::size_t) { load_model_state(model, best_state); };

  TrainResult result;
  result.n_train = train_idx.size();
  result.n_validation = n_val;
  result.schedule = run_schedule(hooks, config.schedule);
  log().info("trained {} epochs, best epoch {} (val {:.6f})", result.schedule.history.size(),
             result.schedule.best_epoch, result.schedule.best_val_loss);
  return result;
}

TrainResult train(Model& model, const Preprocessor& prep, const LabeledDataset& dataset, const TrainConfig& config) {
  std::vector<Instance> instances;
  std::vector<double> targets;
  for (const auto& ex : dataset.examples) {
    instances.push_back(ex.instance);
    targets.push_back(ex.truth.mean);
  }
  auto features = prep.encode_all(instances);
  return train(model, features, targets, config);
}

}  // namespace whitebait
