#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "wnet/masks.hpp"
#include "wnet/nn/loss.hpp"
#include "wnet/nn/model.hpp"

namespace wnet::train {

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  void validate() const;
};

struct TrainConfig {
  double initial_lr = 1e-4;
  double min_lr = 1e-8;
  double check_fraction = 0.1;
  int plateau_patience = 3;
  double lr_decay = 0.5;
  int batch_size = 4;
  int max_epochs = 10;
  /// Optimizer-step cap across all epochs; 0 means no cap.
  std::int64_t max_steps = 0;
  // Optimizer steps during which only stage 1 is updated (0 = fully joint).
  std::int64_t stage2_warmup_steps = 0;
  std::uint64_t seed = 0;
  SplitRatios split;
  /// Worker threads for per-sample gradients within a batch.
  int num_threads = 1;
  nn::Precision precision = nn::Precision::f32;

  void validate() const;
};

/// Everything a training run reads from its flat key-value config file.
struct RunConfig {
  TrainConfig train;
  nn::LossConfig loss;
  nn::WNetConfig model;
  DensityConfig density;
};

/// Parses `key = value` lines; `#` starts a comment. Keys are the field names
/// of the config structs (split ratios as train_ratio/val_ratio/test_ratio,
/// precision as f32/f64). Unknown keys and malformed values throw config.
RunConfig parse_run_config(std::string_view text);
std::string format_run_config(const RunConfig& cfg);

}  // namespace wnet::train
