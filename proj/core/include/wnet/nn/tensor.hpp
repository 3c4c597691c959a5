#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace wnet::nn {

/// Dense C x H x W activation tensor, channel-major.
template <typename T>
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w) {}

  std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const noexcept { return data.size(); }
  T* channel(int c) noexcept { return data.data() + c * plane(); }
  const T* channel(int c) const noexcept { return data.data() + c * plane(); }
};

/// A named parameter tensor. Shapes are [out, in, k, k] for convolution
/// weights and [out] for biases.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;

  std::size_t count() const noexcept { return values.size(); }
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Ordered parameter collection with stable names. Also used for gradients,
/// which share names and shapes with the parameters they belong to.
class ParamStore {
 public:
  void add(std::string name, std::vector<int> shape, std::vector<double> values);

  const Parameter& at(const std::string& name) const;
  Parameter& at(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  const std::vector<Parameter>& items() const noexcept { return items_; }
  std::vector<Parameter>& items() noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t total_count() const noexcept;

  /// Same names and shapes, all values zero.
  ParamStore zeros_like() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.items_ == b.items_; }

 private:
  std::vector<Parameter> items_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace wnet::nn
