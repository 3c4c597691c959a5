#include "wnet/train/adam.hpp"

#include <cmath>

#include "wnet/error.hpp"

namespace wnet::train {

Adam::Adam(const nn::ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& p : params.items()) {
    m_.emplace_back(p.count(), 0.0);
    v_.emplace_back(p.count(), 0.0);
  }
  param_steps_.assign(m_.size(), 0);
}

void Adam::step(nn::ParamStore& params, const nn::ParamStore& grads, double lr, std::span<const bool> frozen) {
  if (params.size() != m_.size() || grads.size() != m_.size() || (!frozen.empty() && frozen.size() != m_.size())) {
    throw Error(ErrorKind::shape, "optimizer state does not match parameter store");
  }
  ++t_;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    const auto t = static_cast<double>(++param_steps_[i]);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t);
    auto& w = params.items()[i].values;
    const auto& g = grads.items()[i].values;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.epsilon);
    }
  }
}

}  // namespace wnet::train
