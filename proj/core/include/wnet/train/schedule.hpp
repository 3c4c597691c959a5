#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "wnet/train/config.hpp"

namespace wnet::train {

/// Validation losses must undercut the best so far by more than this to count
/// as an improvement.
inline constexpr double kImprovementThreshold = 1e-6;

struct CheckRecord {
  std::int64_t step = 0;
  double lr = 0.0;
  double bce = 0.0;
  double l1 = 0.0;
  double total = 0.0;
  double val_total = 0.0;
};

struct TrainState {
  std::int64_t step = 0;
  double current_lr = 0.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int checks_since_improvement = 0;
  std::vector<CheckRecord> history;

  static TrainState initial(const TrainConfig& cfg);
};

/// Reduce-on-plateau: after `plateau_patience` checks without improvement the
/// learning rate is multiplied by `lr_decay`, never dropping below `min_lr`.
/// Throws non_finite for a NaN or infinite validation loss.
TrainState lr_schedule_tick(TrainState state, double val_loss, const TrainConfig& cfg);

/// Samples between validation checks: ceil(check_fraction * train_size).
std::int64_t check_interval(const TrainConfig& cfg, std::size_t train_size);

}  // namespace wnet::train
