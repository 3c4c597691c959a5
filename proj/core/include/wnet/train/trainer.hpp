#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "wnet/masks.hpp"
#include "wnet/nn/loss.hpp"
#include "wnet/nn/model.hpp"
#include "wnet/train/config.hpp"
#include "wnet/train/schedule.hpp"

namespace wnet::train {

struct Sample {
  ImageTile tile;
  nn::Targets targets;
};

/// Rasterizes both training targets for a tile from its annotations.
Sample make_sample(const ImageTile& tile, const PointSet& points, const DensityConfig& cfg);

struct TrainResult {
  nn::WNetModel best_model;   // lowest validation loss seen; the input model if no check ran
  nn::WNetModel final_model;  // parameters after the last step
  TrainState state;
  nn::LossConfig loss;        // with the ratio actually used
  std::optional<std::filesystem::path> checkpoint;  // best-by-validation checkpoint
  std::optional<std::filesystem::path> log;
};

struct TrainHooks {
  std::function<void(const CheckRecord&)> on_check;
};

/// Shuffled mini-batch training with Adam and a validation check every
/// ceil(check_fraction * |train|) samples (checked at batch boundaries).
/// When `out_dir` is non-empty the best checkpoint is kept at
/// out_dir/model.ckpt and one log line per check is appended to
/// out_dir/train.log. An empty `val` set validates on `train_set`.
TrainResult train(const nn::WNetModel& model, const std::vector<Sample>& train_set, const std::vector<Sample>& val,
                  const TrainConfig& cfg, const nn::LossConfig& loss_cfg, const std::filesystem::path& out_dir = {},
                  const TrainHooks& hooks = {});

/// Mean per-sample loss over a set.
nn::LossBreakdown mean_loss(const nn::WNetModel& model, const std::vector<Sample>& samples,
                            const nn::LossConfig& cfg, nn::Precision precision);

}  // namespace wnet::train
