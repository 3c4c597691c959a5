#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wnet/nn/tensor.hpp"

namespace wnet::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment updates over a ParamStore. Each parameter
/// keeps its own step count so a tensor that was frozen starts its moments
/// fresh when released.
class Adam {
 public:
  explicit Adam(const nn::ParamStore& params, AdamConfig cfg = {});

  /// `frozen`, when non-empty, is aligned with the store; frozen tensors are
  /// left untouched.
  void step(nn::ParamStore& params, const nn::ParamStore& grads, double lr, std::span<const bool> frozen = {});
  std::int64_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::int64_t> param_steps_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace wnet::train
