#include <cmath>
#include <limits>

#include "whitebait/error.hpp"
#include "whitebait/log.hpp"
#include "whitebait/optim.hpp"

namespace whitebait {

namespace {
constexpr double kImprovementTolerance = 1e-6;
}

ScheduleResult run_schedule(const ScheduleHooks& hooks, const TrainSchedule& schedule) {
  schedule.validate();
  ScheduleResult result;
  double lr = schedule.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;

  for (std::size_t epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
    const double train_loss = hooks.train_epoch(epoch, lr);
    const double val_loss = hooks.val_loss();
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
    result.history.push_back({epoch, train_loss, val_loss, lr});
    log().debug("epoch {:3d} lr {:.3e} train {:.6f} val {:.6f}", epoch, lr, train_loss, val_loss);

    if (epoch == 1) {
      best = val_loss;
      result.best_epoch = 1;
      stalled = 1;
      if (hooks.on_best) hooks.on_best(epoch);
    } else if (val_loss < best - kImprovementTolerance) {
      best = val_loss;
      result.best_epoch = epoch;
      stalled = 0;
      if (hooks.on_best) hooks.on_best(epoch);
    } else {
      ++stalled;
    }

    if (stalled >= schedule.patience) {
      const double next = lr * schedule.lr_decay_factor;
      if (next < schedule.min_lr) {
        result.stop_reason = ScheduleResult::Stop::min_lr;
        break;
      }
      lr = next;
      stalled = 0;
      result.decay_epochs.push_back(epoch);
    }
  }
  result.best_val_loss = best;
  if (hooks.restore_best) hooks.restore_best(result.best_epoch);
  return result;
}

}  // namespace whitebait
