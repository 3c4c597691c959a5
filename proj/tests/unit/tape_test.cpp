#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "wnet/error.hpp"
#include "wnet/nn/tape.hpp"

namespace wnet::nn {
namespace {

using Id = Tape<double>::Id;
using Graph = std::function<Id(Tape<double>&, Id)>;

ParamStore random_params() {
  ParamStore ps;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto add = [&](const std::string& name, int cout, int cin, int k) {
    std::vector<double> w(static_cast<std::size_t>(cout) * cin * k * k), b(cout);
    for (auto& v : w) v = u(rng);
    for (auto& v : b) v = u(rng);
    ps.add(name + ".weight", {cout, cin, k, k}, w);
    ps.add(name + ".bias", {cout}, b);
  };
  add("a", 3, 2, 3);
  add("b", 2, 3, 3);
  add("c", 1, 5, 1);
  add("d", 4, 2, 5);
  return ps;
}

struct Probe {
  Tensor<double> input;
  Tensor<double> weights;  // upstream gradient; the scalar is sum(weights * output)
};

double scalar(const ParamStore& ps, const Graph& g, const Tensor<double>& x, Tensor<double>& w) {
  Tape<double> tape(ps);
  const Id out = g(tape, tape.input(x));
  const auto& y = tape.value(out);
  if (w.size() != y.size()) {
    w = Tensor<double>(y.channels, y.height, y.width);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : w.data) v = u(rng);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * w.data[i];
  return s;
}

// Central differences on the input and every parameter against reverse mode.
void expect_gradients_match(const Graph& g, int channels, int h, int w) {
  ParamStore ps = random_params();
  Tensor<double> x(channels, h, w);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x.data) v = u(rng);
  Tensor<double> up;
  (void)scalar(ps, g, x, up);

  Tape<double> tape(ps);
  const Id in = tape.input(x);
  const Id out = g(tape, in);
  tape.accumulate_grad(out, up);
  tape.backward();
  const auto gx = tape.gradient(in);
  const auto gp = tape.parameter_gradients();

  const double step = 1e-6;
  auto check = [&](double analytic, double fd, const std::string& what) {
    EXPECT_LE(std::abs(analytic - fd), 1e-6 * std::max({1.0, std::abs(fd)})) << what;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor<double> xp = x, xm = x;
    xp.data[i] += step;
    xm.data[i] -= step;
    check(gx.data[i], (scalar(ps, g, xp, up) - scalar(ps, g, xm, up)) / (2 * step), "input " + std::to_string(i));
  }
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (std::size_t j = 0; j < ps.items()[k].count(); ++j) {
      const double w0 = ps.items()[k].values[j];
      ps.items()[k].values[j] = w0 + step;
      const double fp = scalar(ps, g, x, up);
      ps.items()[k].values[j] = w0 - step;
      const double fm = scalar(ps, g, x, up);
      ps.items()[k].values[j] = w0;
      check(gp.items()[k].values[j], (fp - fm) / (2 * step), ps.items()[k].name + "[" + std::to_string(j) + "]");
    }
  }
}

TEST(TapeGradients, Convolution3x3) {
  expect_gradients_match([](Tape<double>& t, Id x) { return t.conv(x, "a.weight", "a.bias"); }, 2, 5, 6);
}

TEST(TapeGradients, Convolution5x5And1x1) {
  expect_gradients_match([](Tape<double>& t, Id x) { return t.conv(x, "d.weight", "d.bias"); }, 2, 4, 4);
  expect_gradients_match(
      [](Tape<double>& t, Id x) { return t.conv(t.concat(x, t.conv(x, "a.weight", "a.bias")), "c.weight", "c.bias"); },
      2, 3, 5);
}

TEST(TapeGradients, PointwiseOps) {
  expect_gradients_match([](Tape<double>& t, Id x) { return t.sigmoid(x); }, 2, 3, 3);
  expect_gradients_match([](Tape<double>& t, Id x) { return t.relu(x); }, 2, 3, 3);
}

TEST(TapeGradients, PoolAndUpsample) {
  expect_gradients_match([](Tape<double>& t, Id x) { return t.max_pool2(x); }, 2, 6, 4);
  expect_gradients_match([](Tape<double>& t, Id x) { return t.upsample2(x); }, 2, 3, 5);
  expect_gradients_match([](Tape<double>& t, Id x) { return t.upsample2(x); }, 1, 1, 1);
}

TEST(TapeGradients, MiniEncoderDecoderWithReusedNodes) {
  expect_gradients_match(
      [](Tape<double>& t, Id x) {
        const Id s = t.relu(t.conv(x, "a.weight", "a.bias"));
        const Id m = t.relu(t.conv(t.max_pool2(s), "b.weight", "b.bias"));
        const Id cat = t.concat(t.upsample2(m), s);
        return t.sigmoid(t.conv(cat, "c.weight", "c.bias"));
      },
      2, 8, 8);
}

TEST(TapeOps, UpsampleOfConstantIsConstant) {
  ParamStore ps;
  Tape<double> t(ps);
  Tensor<double> x(1, 3, 3);
  for (auto& v : x.data) v = 0.25;
  const auto& y = t.value(t.upsample2(t.input(x)));
  ASSERT_EQ(y.height, 6);
  for (double v : y.data) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(TapeOps, UpsampleUsesHalfPixelCenters) {
  ParamStore ps;
  Tape<double> t(ps);
  Tensor<double> x(1, 1, 2);
  x.data = {0.0, 1.0};
  const auto& y = t.value(t.upsample2(t.input(x)));
  ASSERT_EQ(y.width, 4);
  EXPECT_DOUBLE_EQ(y.data[0], 0.0);
  EXPECT_DOUBLE_EQ(y.data[1], 0.25);
  EXPECT_DOUBLE_EQ(y.data[2], 0.75);
  EXPECT_DOUBLE_EQ(y.data[3], 1.0);
}

TEST(TapeOps, SigmoidStaysInsideOpenInterval) {
  ParamStore ps;
  Tape<float> t(ps);
  Tensor<float> x(1, 1, 4);
  x.data = {-1e4f, -100.0f, 100.0f, 1e4f};
  const auto& y = t.value(t.sigmoid(t.input(x)));
  for (float v : y.data) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
}

TEST(TapeOps, ShapeErrors) {
  ParamStore ps = random_params();
  Tape<double> t(ps);
  const Id odd = t.input(Tensor<double>(2, 3, 4));
  EXPECT_THROW(t.max_pool2(odd), Error);
  EXPECT_THROW(t.conv(t.input(Tensor<double>(3, 4, 4)), "a.weight", "a.bias"), Error);
  EXPECT_THROW(t.concat(t.input(Tensor<double>(1, 2, 2)), t.input(Tensor<double>(1, 4, 4))), Error);
  EXPECT_THROW(t.conv(odd, "missing.weight", "a.bias"), Error);
}

}  // namespace
}  // namespace wnet::nn
