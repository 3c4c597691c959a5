#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "wnet/error.hpp"
#include "wnet/nn/model.hpp"

namespace wnet::nn {
namespace {

ImageTile random_tile(int h, int w, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> px(static_cast<std::size_t>(h) * w * 3);
  for (auto& v : px) v = u(rng);
  return ImageTile("r", h, w, px);
}

// Conv layers: 3x3 weights plus bias, then a 1x1 head.
std::size_t stage_count(int in, int levels, int base) {
  auto conv = [](std::size_t cin, std::size_t cout, std::size_t k) { return cin * cout * k * k + cout; };
  std::size_t n = 0, c_in = in;
  for (int l = 0; l < levels; ++l) {
    const std::size_t c = static_cast<std::size_t>(base) << l;
    n += conv(c_in, c, 3) + conv(c, c, 3);
    c_in = c;
  }
  const std::size_t mid = static_cast<std::size_t>(base) << levels;
  n += conv(c_in, mid, 3) + conv(mid, mid, 3);
  c_in = mid;
  for (int l = levels - 1; l >= 0; --l) {
    const std::size_t c = static_cast<std::size_t>(base) << l;
    n += conv(c_in + c, c, 3) + conv(c, c, 3);
    c_in = c;
  }
  return n + conv(c_in, 1, 1);
}

TEST(Model, SameSeedIsBitIdentical) {
  EXPECT_EQ(build_model({}, 5).params, build_model({}, 5).params);
  EXPECT_FALSE(build_model({}, 5).params == build_model({}, 6).params);
}

TEST(Model, ParameterCountMatchesLayerFormula) {
  const WNetConfig cfg;
  const auto m = build_model(cfg, 1);
  const std::size_t s1 = stage_count(3, cfg.stage1_levels, cfg.stage1_base_channels);
  const std::size_t s2 = stage_count(1, cfg.stage2_levels, cfg.stage2_base_channels);
  EXPECT_EQ(m.stage_parameter_count(1), s1);
  EXPECT_EQ(m.stage_parameter_count(2), s2);
  EXPECT_EQ(m.params.total_count(), s1 + s2);
  EXPECT_GT(s1, s2);
}

TEST(Model, InitializationIsFanInScaledWithPriorHeads) {
  const auto m = build_model({}, 3);
  for (const auto& p : m.params.items()) {
    if (p.shape.size() == 1) {
      double want = 0.0;
      if (p.name == "stage1.head.bias") want = std::log(kMaskHeadPrior / (1 - kMaskHeadPrior));
      if (p.name == "stage2.head.bias") want = std::log(kDensityHeadPrior / (1 - kDensityHeadPrior));
      for (double v : p.values) EXPECT_EQ(v, want) << p.name;
      continue;
    }
    const double bound = std::sqrt(6.0 / (p.shape[1] * p.shape[2] * p.shape[3]));
    for (double v : p.values) ASSERT_LE(std::abs(v), bound) << p.name;
  }
}

TEST(Model, DefaultShapesAndRange) {
  const auto m = build_model({}, 1);
  const auto out = forward(m, ImageTile::filled("z", 128, 128, 0, 0, 0), Precision::f32);
  EXPECT_EQ(out.stage1.height(), 128);
  EXPECT_EQ(out.stage2.width(), 128);
  for (double v : out.stage2.data()) {
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Model, SmallestConfigRuns) {
  const auto m = build_model({1, 1, 1, 1}, 2);
  const auto out = forward(m, random_tile(2, 4, 1));
  EXPECT_EQ(out.stage2.size(), 8u);
}

TEST(Model, RangeHoldsForExtremeParameters) {
  auto m = build_model({1, 2, 1, 1}, 2);
  for (auto& p : m.params.items()) {
    for (auto& v : p.values) v *= 50.0;
  }
  for (auto prec : {Precision::f32, Precision::f64}) {
    const auto out = forward(m, random_tile(4, 4, 3), prec);
    for (double v : out.stage1.data()) {
      ASSERT_GT(v, 0.0);
      ASSERT_LT(v, 1.0);
    }
    for (double v : out.stage2.data()) {
      ASSERT_GT(v, 0.0);
      ASSERT_LT(v, 1.0);
    }
  }
}

TEST(Model, IndivisibleInputNamesTheMultiple) {
  const auto m = build_model({}, 1);
  try {
    (void)forward(m, random_tile(100, 128, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
    EXPECT_NE(std::string(e.what()).find("16"), std::string::npos) << e.what();
  }
}

TEST(Model, DeterministicAcrossRunsAndThreads) {
  const auto m = build_model({2, 4, 2, 2}, 9);
  const auto tile = random_tile(16, 16, 4);
  const auto ref = forward(m, tile, Precision::f32);
  DensityMask other = ref.stage2;
  std::thread([&] { other = forward(m, tile, Precision::f32).stage2; }).join();
  EXPECT_TRUE(std::equal(ref.stage2.data().begin(), ref.stage2.data().end(), other.data().begin()));
  const auto again = forward(m, tile, Precision::f32);
  EXPECT_TRUE(std::equal(ref.stage2.data().begin(), ref.stage2.data().end(), again.stage2.data().begin()));
}

TEST(Model, PrecisionsAgree) {
  const auto m = build_model({2, 4, 2, 2}, 9);
  const auto tile = random_tile(16, 16, 4);
  const auto a = forward(m, tile, Precision::f32), b = forward(m, tile, Precision::f64);
  for (std::size_t i = 0; i < a.stage2.size(); ++i) ASSERT_NEAR(a.stage2.data()[i], b.stage2.data()[i], 1e-5);
}

TEST(Model, CascadePurityStageOneIgnoresStageTwo) {
  auto m = build_model({2, 4, 2, 2}, 9);
  const auto tile = random_tile(16, 16, 5);
  const auto before = forward(m, tile);
  for (auto& p : m.params.items()) {
    if (p.name.starts_with("stage2.")) {
      for (auto& v : p.values) v += 0.3;
    }
  }
  const auto after = forward(m, tile);
  const auto alone = forward_stage1(m, tile);
  EXPECT_TRUE(std::equal(before.stage1.data().begin(), before.stage1.data().end(), after.stage1.data().begin()));
  EXPECT_TRUE(std::equal(alone.data().begin(), alone.data().end(), after.stage1.data().begin()));
  EXPECT_FALSE(std::equal(before.stage2.data().begin(), before.stage2.data().end(), after.stage2.data().begin()));
}

TEST(Model, SingleStageBaseline) {
  const auto m = build_single_stage_model({}, 1);
  EXPECT_FALSE(m.has_stage2());
  EXPECT_EQ(m.params.total_count(), stage_count(3, 4, 16));
  const auto out = forward(m, random_tile(16, 16, 1));
  EXPECT_TRUE(std::equal(out.stage1.data().begin(), out.stage1.data().end(), out.stage2.data().begin()));
}

TEST(Model, ConfigValidation) {
  EXPECT_THROW((WNetConfig{0, 16, 3, 8}.validate()), Error);
  EXPECT_THROW((WNetConfig{4, 0, 3, 8}.validate()), Error);
  EXPECT_EQ((WNetConfig{4, 16, 3, 8}.size_multiple()), 16);
  EXPECT_EQ((WNetConfig{2, 16, 5, 8}.size_multiple()), 32);
}

}  // namespace
}  // namespace wnet::nn
