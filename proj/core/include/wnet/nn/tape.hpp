#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "wnet/nn/tensor.hpp"

namespace wnet::nn {

enum class OpKind { input, conv, relu, sigmoid, max_pool2, upsample2, concat };

/// Reverse-mode tape over the operator set used by the encoder-decoder
/// stages. Nodes are appended in evaluation order; backward() walks them in
/// reverse and accumulates parameter gradients in the tape's own buffers.
template <typename T>
class Tape {
 public:
  using Id = std::size_t;

  explicit Tape(const ParamStore& params);

  Id input(Tensor<T> value);
  /// Same-padded stride-1 convolution; kernel size comes from the weight shape.
  Id conv(Id x, std::string_view weight, std::string_view bias);
  Id relu(Id x);
  /// Logistic activation clamped to the open interval (0,1).
  Id sigmoid(Id x);
  Id max_pool2(Id x);
  /// 2x bilinear upsampling, half-pixel centers, edge-clamped.
  Id upsample2(Id x);
  Id concat(Id a, Id b);

  const Tensor<T>& value(Id id) const { return nodes_[id].value; }
  OpKind kind(Id id) const { return nodes_[id].op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Adds `grad` to dLoss/d(value(id)).
  void accumulate_grad(Id id, const Tensor<T>& grad);
  /// dLoss/d(value(id)) after backward(); zeros if nothing flowed into it.
  Tensor<T> gradient(Id id) const;
  void backward();

  /// Parameter gradients in 64-bit, aligned with the store passed at construction.
  ParamStore parameter_gradients() const;

 private:
  struct Node {
    OpKind op = OpKind::input;
    Tensor<T> value;
    Tensor<T> grad;
    Id a = 0;
    Id b = 0;
    std::size_t weight = 0;
    std::size_t bias = 0;
    int kernel = 0;
    std::vector<int> argmax;
  };

  struct ParamSlot {
    std::vector<T> value;
    std::vector<T> grad;
    bool converted = false;
  };

  ParamSlot& slot(std::size_t index);
  Tensor<T>& grad_of(Id id);
  void backward_conv(Node& node);

  const ParamStore& params_;
  std::vector<ParamSlot> slots_;
  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace wnet::nn
