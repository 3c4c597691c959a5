#include "wnet/train/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "wnet/error.hpp"

namespace wnet::train {

TrainState TrainState::initial(const TrainConfig& cfg) {
  TrainState s;
  s.current_lr = cfg.initial_lr;
  return s;
}

TrainState lr_schedule_tick(TrainState state, double val_loss, const TrainConfig& cfg) {
  if (!std::isfinite(val_loss)) throw Error(ErrorKind::non_finite, "validation loss is not finite");
  if (val_loss < state.best_val_loss - kImprovementThreshold) {
    state.best_val_loss = val_loss;
    state.checks_since_improvement = 0;
    return state;
  }
  if (++state.checks_since_improvement >= cfg.plateau_patience) {
    state.current_lr = std::max(state.current_lr * cfg.lr_decay, cfg.min_lr);
    state.checks_since_improvement = 0;
  }
  return state;
}

std::int64_t check_interval(const TrainConfig& cfg, std::size_t train_size) {
  const auto n = static_cast<std::int64_t>(std::ceil(cfg.check_fraction * static_cast<double>(train_size) - 1e-9));
  return std::max<std::int64_t>(1, n);
}

}  // namespace wnet::train
