#include "wnet/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "graph.hpp"
#include "wnet/error.hpp"

namespace wnet::nn {

double LossConfig::resolved_ratio() const {
  if (!l1_ratio) throw Error(ErrorKind::config, "l1_ratio has not been calibrated");
  if (!std::isfinite(*l1_ratio) || *l1_ratio < 0.0) {
    throw Error(ErrorKind::config, "l1_ratio must be finite and >= 0");
  }
  return *l1_ratio;
}

namespace {

void require_shape(const GrayRaster& a, const GrayRaster& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorKind::shape, std::string(what) + ": " + std::to_string(a.height()) + "x" +
                                      std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                                      "x" + std::to_string(b.width()));
  }
}

double bce_term(double p, double t) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return -(t * std::log(q) + (1.0 - t) * std::log(1.0 - q));
}

// dBCE/dp for one sample; zero where the clamp is active.
double bce_slope(double p, double t) {
  if (p <= kBceEpsilon || p >= 1.0 - kBceEpsilon) return 0.0;
  return -(t / p - (1.0 - t) / (1.0 - p));
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_finite(const LossBreakdown& l) {
  if (!std::isfinite(l.bce)) throw Error(ErrorKind::non_finite, "bce loss is not finite");
  if (!std::isfinite(l.l1)) throw Error(ErrorKind::non_finite, "l1 loss is not finite");
  if (!std::isfinite(l.total)) throw Error(ErrorKind::non_finite, "total loss is not finite");
}

void check_targets(const ImageTile& tile, const Targets& targets) {
  if (targets.binary.height() != tile.height() || targets.binary.width() != tile.width()) {
    throw Error(ErrorKind::shape, "binary target does not match tile dimensions");
  }
  require_shape(targets.binary, targets.density, "target shapes");
}

template <typename T>
Gradients run(const WNetModel& model, const ImageTile& tile, const Targets& targets, const LossConfig& cfg,
              bool with_grads) {
  check_targets(tile, targets);
  const double alpha = cfg.resolved_ratio();
  const detail::FlushDenormals ftz;
  Tape<T> tape(model.params);
  const auto out = detail::build_graph<T>(tape, model, tile);
  const Tensor<T>& p1 = tape.value(out.stage1);
  const Tensor<T>& p2 = tape.value(out.stage2);
  const auto bt = targets.binary.data();
  const auto dt = targets.density.data();
  const double n = static_cast<double>(p1.size());
  const bool wnet = model.has_stage2();

  LossBreakdown l;
  Tensor<T> g1, g2;
  if (with_grads) {
    g1 = Tensor<T>(1, p1.height, p1.width);
    g2 = Tensor<T>(1, p2.height, p2.width);
  }
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (wnet) {
      l.bce += bce_term(p1.data[i], bt[i]);
      if (with_grads) g1.data[i] = static_cast<T>(bce_slope(p1.data[i], bt[i]) / n);
    }
    const double diff = static_cast<double>(p2.data[i]) - dt[i];
    l.l1 += std::abs(diff);
    if (with_grads) g2.data[i] = static_cast<T>(alpha * sign(diff) / n);
  }
  l.bce /= n;
  l.l1 /= n;
  l.total = l.bce + alpha * l.l1;
  check_finite(l);

  Gradients result{ParamStore{}, l};
  if (with_grads) {
    if (wnet) tape.accumulate_grad(out.stage1, g1);
    tape.accumulate_grad(out.stage2, g2);
    tape.backward();
    result.grads = tape.parameter_gradients();
    for (const auto& p : result.grads.items()) {
      for (double v : p.values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::non_finite, "gradient of " + p.name + " is not finite");
      }
    }
  }
  return result;
}

}  // namespace

LossBreakdown loss(const DensityMask& stage1_prob, const DensityMask& stage2_density,
                   const BinaryMask& binary_target, const DensityMask& density_target,
                   const LossConfig& cfg) {
  require_shape(stage1_prob, stage2_density, "stage outputs");
  require_shape(stage1_prob, binary_target, "binary target");
  require_shape(stage2_density, density_target, "density target");
  const double alpha = cfg.resolved_ratio();
  const auto p1 = stage1_prob.data();
  const auto p2 = stage2_density.data();
  const auto bt = binary_target.data();
  const auto dt = density_target.data();
  LossBreakdown l;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    l.bce += bce_term(p1[i], bt[i]);
    l.l1 += std::abs(p2[i] - dt[i]);
  }
  const double n = static_cast<double>(p1.size());
  l.bce /= n;
  l.l1 /= n;
  l.total = l.bce + alpha * l.l1;
  return l;
}

Gradients backward(const WNetModel& model, const ImageTile& tile, const Targets& targets,
                   const LossConfig& cfg, Precision precision) {
  return precision == Precision::f32 ? run<float>(model, tile, targets, cfg, true)
                                     : run<double>(model, tile, targets, cfg, true);
}

LossBreakdown evaluate_loss(const WNetModel& model, const ImageTile& tile, const Targets& targets,
                            const LossConfig& cfg, Precision precision) {
  return precision == Precision::f32 ? run<float>(model, tile, targets, cfg, false).loss
                                     : run<double>(model, tile, targets, cfg, false).loss;
}

}  // namespace wnet::nn
