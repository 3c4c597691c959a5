#pragma once

#include <cstdint>
#include <string>

#include "wnet/image.hpp"
#include "wnet/nn/tensor.hpp"

namespace wnet::nn {

/// Sizes of the two cascaded encoder-decoder stages. A stage with `levels`
/// pooling steps and `base_channels` uses base * 2^l channels at level l and
/// base * 2^levels in the bottleneck.
struct WNetConfig {
  int stage1_levels = 4;
  int stage1_base_channels = 16;
  int stage2_levels = 3;
  int stage2_base_channels = 8;

  void validate() const;
  /// Input height and width must be multiples of this.
  int size_multiple() const;
  friend bool operator==(const WNetConfig&, const WNetConfig&) = default;
};

enum class Architecture {
  wnet,         // image -> mask probabilities -> density
  single_stage, // image -> density, one encoder-decoder (ablation baseline)
};

std::string_view to_string(Architecture arch);
Architecture architecture_from_string(std::string_view name);

enum class Precision { f32, f64 };

struct WNetModel {
  Architecture architecture = Architecture::wnet;
  WNetConfig config;
  std::uint64_t seed = 0;
  ParamStore params;

  bool has_stage2() const noexcept { return architecture == Architecture::wnet; }
  std::size_t stage_parameter_count(int stage) const;
  /// Input height and width must be multiples of this.
  int input_multiple() const;
};

/// Initial output of the mask head and of the density head: each head bias
/// starts at the logit of the target's typical foreground fraction.
inline constexpr double kMaskHeadPrior = 0.12;
inline constexpr double kDensityHeadPrior = 0.03;

/// Deterministic fan-in scaled uniform weights; zero biases except the heads,
/// which start at the logits of the priors above.
WNetModel build_model(const WNetConfig& cfg, std::uint64_t seed);

/// Single encoder-decoder mapping the image straight to density. Only the
/// stage-1 fields of `cfg` are used.
WNetModel build_single_stage_model(const WNetConfig& cfg, std::uint64_t seed);

struct ForwardResult {
  DensityMask stage1;  // mask probabilities; for single-stage models a copy of `stage2`
  DensityMask stage2;  // density prediction
};

/// Both outputs are H x W with values strictly inside (0,1). Throws shape
/// unless H and W are multiples of cfg.size_multiple().
ForwardResult forward(const WNetModel& model, const ImageTile& tile, Precision precision = Precision::f64);

/// Runs only the stage-1 network. Test hook for the cascade-purity property.
DensityMask forward_stage1(const WNetModel& model, const ImageTile& tile, Precision precision = Precision::f64);

}  // namespace wnet::nn
