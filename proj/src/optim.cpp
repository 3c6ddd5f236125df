#include "whitebait/optim.hpp"

#include <cmath>

#include "whitebait/error.hpp"

namespace whitebait {

void TrainSchedule::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("rho must be in (0,1)");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be > 0");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) throw InputError("lr_decay_factor must be in (0,1)");
  if (patience < 1) throw InputError("patience must be >= 1");
  if (max_epochs < 1) throw InputError("max_epochs must be >= 1");
  if (!(min_lr >= 0.0)) throw InputError("min_lr must be >= 0");
}

void rmsprop_step(Parameter& param, const TrainSchedule& schedule, double learning_rate) {
  if (param.frozen) return;
  if (!param.gradient.all_finite()) throw NumericError("non-finite gradient for parameter " + param.name);
  const double lr = learning_rate * param.lr_scale;
  const double rho = schedule.rho;
  auto value = param.value.data();
  auto grad = param.gradient.data();
  auto acc = param.accumulator.data();
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = grad[i];
    acc[i] = rho * acc[i] + (1.0 - rho) * g * g;
    value[i] -= lr * g / (std::sqrt(acc[i]) + schedule.epsilon);
  }
}

}  // namespace whitebait
