#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Core>

#include "wnet/error.hpp"
#include "wnet/nn/tape.hpp"
#include "wnet/nn/tensor.hpp"

namespace wnet::nn {

void ParamStore::add(std::string name, std::vector<int> shape, std::vector<double> values) {
  const std::size_t expected = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                               [](std::size_t a, int b) { return a * b; });
  if (expected != values.size()) {
    throw Error(ErrorKind::shape, "parameter " + name + " has " + std::to_string(values.size()) +
                                      " values for a shape of " + std::to_string(expected));
  }
  if (contains(name)) throw Error(ErrorKind::conflict, "parameter " + name + " already defined");
  index_[name] = items_.size();
  items_.push_back({std::move(name), std::move(shape), std::move(values)});
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::not_found, "no parameter named " + name);
  return it->second;
}

const Parameter& ParamStore::at(const std::string& name) const { return items_[index_of(name)]; }
Parameter& ParamStore::at(const std::string& name) { return items_[index_of(name)]; }

std::size_t ParamStore::total_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.count();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const auto& p : items_) out.add(p.name, p.shape, std::vector<double>(p.count(), 0.0));
  return out;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unfolds a same-padded k x k neighbourhood into rows (c, ky, kx) of `cols`.
template <typename T>
void im2col(const Tensor<T>& x, int k, std::vector<T>& cols) {
  const int h = x.height, w = x.width, r = k / 2;
  const std::size_t hw = x.plane();
  cols.resize(static_cast<std::size_t>(x.channels) * k * k * hw);
  for (int c = 0; c < x.channels; ++c) {
    const T* src = x.channel(c);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols.data() + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw;
        const int dy = ky - r, dx = kx - r;
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = 0; y < h; ++y) {
          T* row = dst + y * w;
          const int sy = y + dy;
          if (sy < 0 || sy >= h) {
            std::fill(row, row + w, T(0));
            continue;
          }
          std::fill(row, row + x0, T(0));
          std::copy(src + sy * w + x0 + dx, src + sy * w + x1 + dx, row + x0);
          std::fill(row + x1, row + w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const std::vector<T>& cols, int k, Tensor<T>& dx) {
  const int h = dx.height, w = dx.width, r = k / 2;
  const std::size_t hw = dx.plane();
  for (int c = 0; c < dx.channels; ++c) {
    T* dst = dx.channel(c);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols.data() + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw;
        const int dy = ky - r, dxo = kx - r;
        const int x0 = std::max(0, -dxo), x1 = std::min(w, w - dxo);
        for (int y = 0; y < h; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          T* d = dst + sy * w + dxo;
          const T* s = src + y * w;
          for (int xx = x0; xx < x1; ++xx) d[xx] += s[xx];
        }
      }
    }
  }
}

// Source taps of 2x bilinear upsampling along one axis of length n.
struct Taps {
  std::vector<int> lo, hi;
  std::vector<double> frac;
};

Taps upsample_taps(int n) {
  Taps t;
  const int m = 2 * n;
  t.lo.resize(m);
  t.hi.resize(m);
  t.frac.resize(m);
  for (int o = 0; o < m; ++o) {
    const double src = std::max(0.0, (o + 0.5) / 2.0 - 0.5);
    const int i0 = std::min(static_cast<int>(src), n - 1);
    t.lo[o] = i0;
    t.hi[o] = std::min(i0 + 1, n - 1);
    t.frac[o] = src - i0;
  }
  return t;
}

template <typename T>
void require_same_plane(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(ErrorKind::shape, std::string(op) + ": spatial sizes differ");
  }
}

}  // namespace

template <typename T>
Tape<T>::Tape(const ParamStore& params) : params_(params), slots_(params.size()) {}

template <typename T>
typename Tape<T>::ParamSlot& Tape<T>::slot(std::size_t index) {
  ParamSlot& s = slots_[index];
  if (!s.converted) {
    const auto& v = params_.items()[index].values;
    s.value.assign(v.begin(), v.end());
    s.grad.assign(v.size(), T(0));
    s.converted = true;
  }
  return s;
}

template <typename T>
typename Tape<T>::Id Tape<T>::input(Tensor<T> value) {
  Node n;
  n.op = OpKind::input;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::conv(Id x, std::string_view weight, std::string_view bias) {
  const std::size_t wi = params_.index_of(std::string(weight));
  const std::size_t bi = params_.index_of(std::string(bias));
  const auto& shape = params_.items()[wi].shape;
  if (shape.size() != 4 || shape[2] != shape[3] || shape[2] % 2 == 0) {
    throw Error(ErrorKind::shape, std::string(weight) + " is not an odd square convolution kernel");
  }
  const int cout = shape[0], cin = shape[1], k = shape[2];
  const Tensor<T>& in = nodes_[x].value;
  if (in.channels != cin) {
    throw Error(ErrorKind::shape, std::string(weight) + " expects " + std::to_string(cin) +
                                      " input channels, got " + std::to_string(in.channels));
  }
  ParamSlot& ws = slot(wi);
  ParamSlot& bs = slot(bi);

  Node n;
  n.op = OpKind::conv;
  n.a = x;
  n.weight = wi;
  n.bias = bi;
  n.kernel = k;
  n.value = Tensor<T>(cout, in.height, in.width);
  const auto hw = static_cast<Eigen::Index>(in.plane());
  const auto depth = static_cast<Eigen::Index>(cin) * k * k;

  thread_local std::vector<T> cols;
  const T* cols_ptr = in.data.data();
  if (k != 1) {
    im2col(in, k, cols);
    cols_ptr = cols.data();
  }
  Eigen::Map<const RowMat<T>> wm(ws.value.data(), cout, depth);
  Eigen::Map<const RowMat<T>> cm(cols_ptr, depth, hw);
  Eigen::Map<RowMat<T>> ym(n.value.data.data(), cout, hw);
  ym.noalias() = wm * cm;
  for (int c = 0; c < cout; ++c) ym.row(c).array() += bs.value[c];

  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::relu(Id x) {
  Node n;
  n.op = OpKind::relu;
  n.a = x;
  n.value = nodes_[x].value;
  for (T& v : n.value.data) v = v > T(0) ? v : T(0);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::sigmoid(Id x) {
  constexpr T lo = std::numeric_limits<T>::min();
  constexpr T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
  Node n;
  n.op = OpKind::sigmoid;
  n.a = x;
  n.value = nodes_[x].value;
  for (T& v : n.value.data) {
    const T s = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
    v = std::clamp(s, lo, hi);
  }
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::max_pool2(Id x) {
  const Tensor<T>& in = nodes_[x].value;
  if (in.height % 2 != 0 || in.width % 2 != 0) {
    throw Error(ErrorKind::shape, "max_pool2 needs even spatial dimensions, got " +
                                      std::to_string(in.height) + "x" + std::to_string(in.width));
  }
  Node n;
  n.op = OpKind::max_pool2;
  n.a = x;
  n.value = Tensor<T>(in.channels, in.height / 2, in.width / 2);
  n.argmax.resize(n.value.size());
  const int ow = n.value.width;
  for (int c = 0; c < in.channels; ++c) {
    const T* src = in.channel(c);
    T* dst = n.value.channel(c);
    int* arg = n.argmax.data() + c * n.value.plane();
    for (int y = 0; y < n.value.height; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        const int base = 2 * y * in.width + 2 * xx;
        const int cand[4] = {base, base + 1, base + in.width, base + in.width + 1};
        int best = cand[0];
        for (int i = 1; i < 4; ++i) {
          if (src[cand[i]] > src[best]) best = cand[i];
        }
        dst[y * ow + xx] = src[best];
        arg[y * ow + xx] = best;
      }
    }
  }
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::upsample2(Id x) {
  const Tensor<T>& in = nodes_[x].value;
  Node n;
  n.op = OpKind::upsample2;
  n.a = x;
  n.value = Tensor<T>(in.channels, in.height * 2, in.width * 2);
  const Taps ty = upsample_taps(in.height), tx = upsample_taps(in.width);
  const int ow = n.value.width;
  for (int c = 0; c < in.channels; ++c) {
    const T* src = in.channel(c);
    T* dst = n.value.channel(c);
    for (int y = 0; y < n.value.height; ++y) {
      const T fy = static_cast<T>(ty.frac[y]);
      const T* r0 = src + ty.lo[y] * in.width;
      const T* r1 = src + ty.hi[y] * in.width;
      for (int xx = 0; xx < ow; ++xx) {
        const T fx = static_cast<T>(tx.frac[xx]);
        const T top = r0[tx.lo[xx]] * (T(1) - fx) + r0[tx.hi[xx]] * fx;
        const T bot = r1[tx.lo[xx]] * (T(1) - fx) + r1[tx.hi[xx]] * fx;
        dst[y * ow + xx] = top * (T(1) - fy) + bot * fy;
      }
    }
  }
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::concat(Id a, Id b) {
  const Tensor<T>& ta = nodes_[a].value;
  const Tensor<T>& tb = nodes_[b].value;
  require_same_plane(ta, tb, "concat");
  Node n;
  n.op = OpKind::concat;
  n.a = a;
  n.b = b;
  n.value = Tensor<T>(ta.channels + tb.channels, ta.height, ta.width);
  std::copy(ta.data.begin(), ta.data.end(), n.value.data.begin());
  std::copy(tb.data.begin(), tb.data.end(), n.value.data.begin() + ta.size());
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename T>
Tensor<T>& Tape<T>::grad_of(Id id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor<T>(n.value.channels, n.value.height, n.value.width);
  return n.grad;
}

template <typename T>
Tensor<T> Tape<T>::gradient(Id id) const {
  const Node& n = nodes_.at(id);
  if (n.grad.size() == n.value.size()) return n.grad;
  return Tensor<T>(n.value.channels, n.value.height, n.value.width);
}

template <typename T>
void Tape<T>::accumulate_grad(Id id, const Tensor<T>& grad) {
  Tensor<T>& g = grad_of(id);
  if (grad.size() != g.size()) throw Error(ErrorKind::shape, "gradient shape mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += grad.data[i];
}

template <typename T>
void Tape<T>::backward_conv(Node& node) {
  const Tensor<T>& in = nodes_[node.a].value;
  ParamSlot& ws = slot(node.weight);
  ParamSlot& bs = slot(node.bias);
  const int k = node.kernel;
  const int cout = node.value.channels;
  const auto hw = static_cast<Eigen::Index>(in.plane());
  const auto depth = static_cast<Eigen::Index>(in.channels) * k * k;

  thread_local std::vector<T> cols;
  const T* cols_ptr = in.data.data();
  if (k != 1) {
    im2col(in, k, cols);
    cols_ptr = cols.data();
  }
  Eigen::Map<const RowMat<T>> dy(node.grad.data.data(), cout, hw);
  Eigen::Map<const RowMat<T>> cm(cols_ptr, depth, hw);
  Eigen::Map<RowMat<T>> dw(ws.grad.data(), cout, depth);
  dw.noalias() += dy * cm.transpose();
  for (int c = 0; c < cout; ++c) {
    const T* row = node.grad.data.data() + static_cast<std::size_t>(c) * in.plane();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < hw; ++i) acc += static_cast<double>(row[i]);
    bs.grad[c] += static_cast<T>(acc);
  }

  Eigen::Map<const RowMat<T>> wm(ws.value.data(), cout, depth);
  Tensor<T>& dx = grad_of(node.a);
  if (k == 1) {
    Eigen::Map<RowMat<T>> dxm(dx.data.data(), depth, hw);
    dxm.noalias() += wm.transpose() * dy;
  } else {
    thread_local std::vector<T> dcols;
    dcols.resize(static_cast<std::size_t>(depth) * hw);
    Eigen::Map<RowMat<T>> dcm(dcols.data(), depth, hw);
    dcm.noalias() = wm.transpose() * dy;
    col2im_add(dcols, k, dx);
  }
}

template <typename T>
void Tape<T>::backward() {
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || n.op == OpKind::input) continue;
    switch (n.op) {
      case OpKind::conv:
        backward_conv(n);
        break;
      case OpKind::relu: {
        Tensor<T>& dx = grad_of(n.a);
        for (std::size_t j = 0; j < n.value.size(); ++j) {
          if (n.value.data[j] > T(0)) dx.data[j] += n.grad.data[j];
        }
        break;
      }
      case OpKind::sigmoid: {
        Tensor<T>& dx = grad_of(n.a);
        for (std::size_t j = 0; j < n.value.size(); ++j) {
          const T y = n.value.data[j];
          dx.data[j] += n.grad.data[j] * y * (T(1) - y);
        }
        break;
      }
      case OpKind::max_pool2: {
        Tensor<T>& dx = grad_of(n.a);
        const std::size_t in_plane = dx.plane(), out_plane = n.value.plane();
        for (int c = 0; c < n.value.channels; ++c) {
          T* d = dx.channel(c);
          const T* g = n.grad.channel(c);
          const int* arg = n.argmax.data() + c * out_plane;
          for (std::size_t j = 0; j < out_plane; ++j) d[arg[j]] += g[j];
          (void)in_plane;
        }
        break;
      }
      case OpKind::upsample2: {
        Tensor<T>& dx = grad_of(n.a);
        const Taps ty = upsample_taps(dx.height), tx = upsample_taps(dx.width);
        const int ow = n.value.width;
        for (int c = 0; c < n.value.channels; ++c) {
          T* d = dx.channel(c);
          const T* g = n.grad.channel(c);
          for (int y = 0; y < n.value.height; ++y) {
            const T fy = static_cast<T>(ty.frac[y]);
            T* r0 = d + ty.lo[y] * dx.width;
            T* r1 = d + ty.hi[y] * dx.width;
            for (int xx = 0; xx < ow; ++xx) {
              const T fx = static_cast<T>(tx.frac[xx]);
              const T gv = g[y * ow + xx];
              r0[tx.lo[xx]] += gv * (T(1) - fy) * (T(1) - fx);
              r0[tx.hi[xx]] += gv * (T(1) - fy) * fx;
              r1[tx.lo[xx]] += gv * fy * (T(1) - fx);
              r1[tx.hi[xx]] += gv * fy * fx;
            }
          }
        }
        break;
      }
      case OpKind::concat: {
        Tensor<T>& da = grad_of(n.a);
        const std::size_t na = da.size();
        for (std::size_t j = 0; j < na; ++j) da.data[j] += n.grad.data[j];
        Tensor<T>& db = grad_of(n.b);
        for (std::size_t j = 0; j < db.size(); ++j) db.data[j] += n.grad.data[na + j];
        break;
      }
      case OpKind::input:
        break;
    }
    // Activations upstream are still needed; this node's gradient is not.
    n.grad = Tensor<T>();
  }
}

template <typename T>
ParamStore Tape<T>::parameter_gradients() const {
  ParamStore out = params_.zeros_like();
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i].converted) continue;
    auto& dst = out.items()[i].values;
    std::copy(slots_[i].grad.begin(), slots_[i].grad.end(), dst.begin());
  }
  return out;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace wnet::nn
