#pragma once

#include <optional>

#include "wnet/image.hpp"
#include "wnet/nn/model.hpp"
#include "wnet/nn/tensor.hpp"

namespace wnet::nn {

/// Probabilities are clamped to [kBceEpsilon, 1 - kBceEpsilon] inside the log.
inline constexpr double kBceEpsilon = 1e-7;

struct LossConfig {
  /// Weight of the L1 term. Unset means "calibrate on the first training
  /// batch" (bce0 / max(l1_0, 1e-8)); loss() and backward() need it set.
  std::optional<double> l1_ratio;

  double resolved_ratio() const;
};

struct LossBreakdown {
  double bce = 0.0;
  double l1 = 0.0;
  double total = 0.0;
};

struct Targets {
  BinaryMask binary;
  DensityMask density;
};

/// total = bce + l1_ratio * l1 with mean BCE on stage 1 and mean absolute
/// error on stage 2.
LossBreakdown loss(const DensityMask& stage1_prob, const DensityMask& stage2_density,
                   const BinaryMask& binary_target, const DensityMask& density_target,
                   const LossConfig& cfg);

struct Gradients {
  ParamStore grads;
  LossBreakdown loss;
};

/// Reverse-mode gradient of the joint loss for one tile. Throws non_finite if
/// any loss component is NaN or infinite. Single-stage models are trained on
/// the L1 term alone.
Gradients backward(const WNetModel& model, const ImageTile& tile, const Targets& targets,
                   const LossConfig& cfg, Precision precision = Precision::f64);

/// Loss without gradients, using the same precision path as training.
LossBreakdown evaluate_loss(const WNetModel& model, const ImageTile& tile, const Targets& targets,
                            const LossConfig& cfg, Precision precision = Precision::f64);

}  // namespace wnet::nn
