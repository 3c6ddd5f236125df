#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "whitebait/tape.hpp"

namespace whitebait {

struct TrainSchedule {
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  std::size_t patience = 5;
  double lr_decay_factor = 0.5;
  std::size_t max_epochs = 100;
  double min_lr = 1e-5;

  // Throws InputError when a field is out of range.
  void validate() const;
};

// acc <- rho*acc + (1-rho)*g^2 ; value <- value - lr*g / (sqrt(acc) + eps)
// with lr = learning_rate * param.lr_scale. Frozen parameters are skipped.
// Throws NumericError on a non-finite gradient.
void rmsprop_step(Parameter& param, const TrainSchedule& schedule, double learning_rate);
inline void rmsprop_step(Parameter& param, const TrainSchedule& schedule) {
  rmsprop_step(param, schedule, schedule.learning_rate);
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct ScheduleResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  enum class Stop { max_epochs, min_lr } stop_reason = Stop::max_epochs;
  // Epochs after which the learning rate was multiplied by lr_decay_factor.
  std::vector<std::size_t> decay_epochs;
};

struct ScheduleHooks {
  // Runs one training epoch at the given learning rate, returns train loss.
  std::function<double(std::size_t epoch, double lr)> train_epoch;
  std::function<double()> val_loss;
  // Called whenever a new best validation loss is reached; the caller
  // snapshots its parameters here.
  std::function<void(std::size_t epoch)> on_best;
  // Called once at the end to reinstate the best snapshot.
  std::function<void(std::size_t epoch)> restore_best;
};

// Early stopping with learning-rate decay on plateau. The first epoch sets
// the reference loss and counts towards patience; later epochs reset the
// counter only on a strict improvement (by more than 1e-6). When the counter
// reaches `patience` the rate is decayed and the counter reset, unless the
// decayed rate would drop below min_lr, in which case training stops.
ScheduleResult run_schedule(const ScheduleHooks& hooks, const TrainSchedule& schedule);

}  // namespace whitebait
