#pragma once

#include <string>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include "wnet/error.hpp"
#include "wnet/nn/model.hpp"
#include "wnet/nn/tape.hpp"

namespace wnet::nn::detail {

/// Flushes subnormal floats to zero for the current thread while alive.
/// Saturated logistic heads otherwise produce subnormals that stall the CPU.
class FlushDenormals {
 public:
#if defined(__SSE__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
 public:
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;
};

template <typename T>
Tensor<T> tile_to_tensor(const ImageTile& tile) {
  Tensor<T> t(3, tile.height(), tile.width());
  const auto data = tile.data();
  const std::size_t plane = t.plane();
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) t.data[c * plane + i] = static_cast<T>(data[i * 3 + c]);
  }
  return t;
}

template <typename T>
DensityMask tensor_to_mask(const Tensor<T>& t, const std::string& image_id) {
  return DensityMask(image_id, t.height, t.width, std::vector<double>(t.data.begin(), t.data.end()));
}

inline void check_input_shape(const WNetModel& model, int height, int width) {
  const int m = model.input_multiple();
  if (height % m != 0 || width % m != 0) {
    throw Error(ErrorKind::shape, "input " + std::to_string(height) + "x" + std::to_string(width) +
                                      " must be a multiple of " + std::to_string(m) +
                                      " in both dimensions (pad first)");
  }
}

/// One U-shaped encoder-decoder with skip concatenations, ending in a 1x1
/// convolution and a logistic head.
template <typename T>
typename Tape<T>::Id build_stage(Tape<T>& tape, typename Tape<T>::Id x, const std::string& prefix,
                                 int levels) {
  using Id = typename Tape<T>::Id;
  auto conv_relu = [&](Id in, const std::string& layer) {
    return tape.relu(tape.conv(in, prefix + layer + ".weight", prefix + layer + ".bias"));
  };
  std::vector<Id> skips;
  Id h = x;
  for (int l = 0; l < levels; ++l) {
    const std::string name = "enc" + std::to_string(l);
    h = conv_relu(h, name + ".conv1");
    h = conv_relu(h, name + ".conv2");
    skips.push_back(h);
    h = tape.max_pool2(h);
  }
  h = conv_relu(h, "mid.conv1");
  h = conv_relu(h, "mid.conv2");
  for (int l = levels - 1; l >= 0; --l) {
    const std::string name = "dec" + std::to_string(l);
    h = tape.concat(tape.upsample2(h), skips[l]);
    h = conv_relu(h, name + ".conv1");
    h = conv_relu(h, name + ".conv2");
  }
  return tape.sigmoid(tape.conv(h, prefix + "head.weight", prefix + "head.bias"));
}

template <typename T>
struct GraphOutputs {
  typename Tape<T>::Id stage1;
  typename Tape<T>::Id stage2;
};

template <typename T>
GraphOutputs<T> build_graph(Tape<T>& tape, const WNetModel& model, const ImageTile& tile) {
  check_input_shape(model, tile.height(), tile.width());
  const auto in = tape.input(tile_to_tensor<T>(tile));
  const auto s1 = build_stage<T>(tape, in, "stage1.", model.config.stage1_levels);
  if (!model.has_stage2()) return {s1, s1};
  const auto s2 = build_stage<T>(tape, s1, "stage2.", model.config.stage2_levels);
  return {s1, s2};
}

}  // namespace wnet::nn::detail
