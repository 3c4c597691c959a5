#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "wnet/masks.hpp"
#include "wnet/nn/loss.hpp"

namespace wnet::testing {

struct GradCheckResult {
  double worst_relative = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
  std::size_t refined = 0;  // entries re-differenced with a smaller step because a kink fell inside the stencil
};

// Compares reverse-mode gradients of the joint loss against central
// differences in 64-bit on a random 16x16 tile with two random points.
// Parameters are jittered so no ReLU sits exactly on its kink. When an entry
// misses the tolerance and its two one-sided differences disagree, a ReLU or
// L1 kink lies inside the stencil; that entry is re-differenced with the step
// divided by ten until the one-sided differences agree (down to 1e-7).
// `stride` > 1 samples every stride-th entry of each tensor.
inline GradCheckResult check_model_gradients(const nn::WNetConfig& cfg, std::uint64_t seed, std::size_t stride = 1,
                                             double step = 1e-4, double floor = 1e-6, double tolerance = 1e-4) {
  auto model = nn::build_model(cfg, seed);
  std::mt19937_64 rng(seed * 7919 + 1);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1), u(0.0, 1.0), pos(1.0, 15.0);
  for (auto& p : model.params.items()) {
    for (auto& v : p.values) v += jitter(rng);
  }
  std::vector<double> px(16 * 16 * 3);
  for (auto& v : px) v = u(rng);
  const ImageTile tile("g", 16, 16, px);
  const PointSet pts("g", {{pos(rng), pos(rng)}, {pos(rng), pos(rng)}});
  const nn::Targets targets{render_binary_target(pts, 16, 16, {}), render_density(pts, 16, 16, {})};
  const nn::LossConfig lc{1.0 + u(rng)};

  auto eval = [&] { return nn::evaluate_loss(model, tile, targets, lc).total; };
  const auto analytic = nn::backward(model, tile, targets, lc, nn::Precision::f64);
  const double center = eval();
  GradCheckResult r;
  for (std::size_t k = 0; k < model.params.size(); ++k) {
    auto& p = model.params.items()[k];
    const std::size_t offset = stride > 1 ? seed % stride : 0;
    for (std::size_t j = offset % std::max<std::size_t>(p.count(), 1); j < p.count(); j += stride) {
      const double w0 = p.values[j];
      const double an = analytic.grads.items()[k].values[j];
      double rel = 0.0;
      for (double h = step;; h /= 10.0) {
        p.values[j] = w0 + h;
        const double lp = eval();
        p.values[j] = w0 - h;
        const double lm = eval();
        p.values[j] = w0;
        const double fd = (lp - lm) / (2.0 * h);
        rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), floor});
        if (rel <= tolerance || h < 1e-7 * 1.5) break;
        const double right = (lp - center) / h, left = (center - lm) / h;
        if (std::abs(right - left) <= 2.0 * tolerance * std::max({std::abs(right), std::abs(left), floor})) break;
        if (h == step) ++r.refined;
      }
      ++r.checked;
      if (rel > r.worst_relative) {
        r.worst_relative = rel;
        r.worst_parameter = p.name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return r;
}

}  // namespace wnet::testing
