#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "wnet/detect/detector.hpp"
#include "wnet/detect/padding.hpp"
#include "wnet/detect/peaks.hpp"
#include "wnet/error.hpp"
#include "wnet/masks.hpp"

namespace wnet::detect {
namespace {

DensityMask raster(int h, int w, std::vector<double> v) { return DensityMask("r", h, w, std::move(v)); }

// Quadratic reference: collect candidates by brute force, stable-sort by value,
// then compare every candidate against every accepted peak.
std::vector<Center> reference_peaks(const DensityMask& m, const PeakConfig& cfg) {
  struct Cand {
    int r, c;
    double v;
  };
  std::vector<Cand> cands;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const double v = m.at(r, c);
      if (v < cfg.threshold) continue;
      bool local_max = true;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if ((dr || dc) && rr >= 0 && cc >= 0 && rr < m.height() && cc < m.width() && m.at(rr, cc) > v) {
            local_max = false;
          }
        }
      }
      if (local_max) cands.push_back({r, c, v});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.v > b.v; });
  std::vector<Center> out;
  for (const Cand& k : cands) {
    bool keep = true;
    for (const Center& a : out) {
      if (std::hypot(a.x - k.c, a.y - k.r) < cfg.nms_min_distance) keep = false;
    }
    if (keep) out.push_back({static_cast<double>(k.c), static_cast<double>(k.r), k.v});
  }
  return out;
}

TEST(Peaks, SinglePixel) {
  std::vector<double> v(100, 0.0);
  v[5 * 10 + 5] = 1.0;
  const auto d = extract_peaks(raster(10, 10, v), {});
  ASSERT_EQ(d.centers.size(), 1u);
  EXPECT_EQ(d.centers[0], (Center{5.0, 5.0, 1.0}));
  EXPECT_EQ(d.image_id, "r");
}

TEST(Peaks, NearbyWeakerPeakIsSuppressed) {
  std::vector<double> v(144, 0.0);
  v[5 * 12 + 5] = 0.9;
  v[5 * 12 + 8] = 0.8;
  const auto d = extract_peaks(raster(12, 12, v), {0.3, 4.0});
  ASSERT_EQ(d.centers.size(), 1u);
  EXPECT_EQ(d.centers[0].x, 5.0);
  EXPECT_EQ(d.centers[0].y, 5.0);
  EXPECT_EQ(d.centers[0].score, 0.9);
}

TEST(Peaks, UniformRasterPacksFromOrigin) {
  const PeakConfig cfg{0.3, 4.0};
  const auto m = raster(20, 20, std::vector<double>(400, 0.5));
  const auto d = extract_peaks(m, cfg);
  ASSERT_FALSE(d.centers.empty());
  EXPECT_EQ(d.centers[0].x, 0.0);
  EXPECT_EQ(d.centers[0].y, 0.0);
  for (std::size_t i = 0; i < d.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < d.centers.size(); ++j) {
      EXPECT_GE(std::hypot(d.centers[i].x - d.centers[j].x, d.centers[i].y - d.centers[j].y), 4.0);
    }
  }
  EXPECT_EQ(d.centers, reference_peaks(m, cfg));
}

TEST(Peaks, BelowThresholdAndEmpty) {
  EXPECT_TRUE(extract_peaks(raster(8, 8, std::vector<double>(64, 0.29)), {}).centers.empty());
  EXPECT_TRUE(extract_peaks(raster(8, 8, std::vector<double>(64, 0.0)), {}).centers.empty());
  EXPECT_EQ(extract_peaks(raster(1, 1, {0.3}), {}).centers.size(), 1u);
}

TEST(Peaks, AgreesWithReferenceOnRandomRasters) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int h = dim(rng), w = dim(rng);
    std::vector<double> v(static_cast<std::size_t>(h) * w);
    const int levels = trial % 3 == 0 ? 4 : 0;
    for (auto& x : v) x = levels ? std::floor(u(rng) * levels) / levels : u(rng);
    const PeakConfig cfg{0.05 + 0.9 * u(rng), 0.5 + 6.0 * u(rng)};
    const auto m = raster(h, w, v);
    const auto got = extract_peaks(m, cfg);
    ASSERT_EQ(got.centers, reference_peaks(m, cfg)) << "trial " << trial;
    for (const auto& c : got.centers) ASSERT_GE(c.score, cfg.threshold);
  }
}

TEST(Peaks, ConfigValidation) {
  for (const PeakConfig bad : {PeakConfig{0.0, 4.0}, PeakConfig{1.0, 4.0}, PeakConfig{0.3, 0.0},
                               PeakConfig{std::nan(""), 4.0}}) {
    try {
      bad.validate();
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::config);
    }
  }
}

TEST(Peaks, GroundTruthDensityRecoversCenters) {
  const PointSet pts("t", {{10, 12}, {30, 40}, {50, 9}, {21.4, 33.6}});
  const auto d = extract_peaks(render_density(pts, 64, 64, {}), {});
  ASSERT_EQ(d.centers.size(), pts.size());
  for (const auto& p : pts.points()) {
    const bool found = std::any_of(d.centers.begin(), d.centers.end(),
                                   [&](const Center& c) { return std::hypot(c.x - p.x, c.y - p.y) <= 1.0; });
    EXPECT_TRUE(found) << p.x << "," << p.y;
  }
}

ImageTile ramp(int h, int w) {
  std::vector<double> v(static_cast<std::size_t>(h) * w * 3);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 251) / 250.0;
  return ImageTile("t", h, w, v);
}

TEST(Padding, Examples) {
  const auto [same, r0] = pad_to_multiple(ramp(128, 128), 16);
  EXPECT_EQ(same.height(), 128);
  EXPECT_EQ(r0.height, 128);
  const auto [big, r1] = pad_to_multiple(ramp(500, 500), 16);
  EXPECT_EQ(big.height(), 512);
  EXPECT_EQ(big.width(), 512);
  const DensityMask full("d", 512, 512, std::vector<double>(512 * 512, 0.25));
  const auto back = crop_back(full, r1);
  EXPECT_EQ(back.height(), 500);
  EXPECT_EQ(back.width(), 500);
  const auto [one, r2] = pad_to_multiple(ramp(1, 1), 16);
  EXPECT_EQ(one.height(), 16);
  EXPECT_EQ(one.width(), 16);
  EXPECT_EQ(r2.height, 1);
}

TEST(Padding, ReflectsWithoutRepeatingTheEdge) {
  EXPECT_EQ(reflect_index(0, 5), 0);
  EXPECT_EQ(reflect_index(4, 5), 4);
  EXPECT_EQ(reflect_index(5, 5), 3);
  EXPECT_EQ(reflect_index(6, 5), 2);
  EXPECT_EQ(reflect_index(7, 1), 0);
  const auto tile = ramp(5, 3);
  const auto [p, rec] = pad_to_multiple(tile, 4);
  ASSERT_EQ(p.height(), 8);
  ASSERT_EQ(p.width(), 4);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        ASSERT_EQ(p.at(r, c, ch), tile.at(reflect_index(r, 5), reflect_index(c, 3), ch));
      }
    }
  }
}

TEST(Detector, HandlesSizesThatAreNotMultiples) {
  auto model = std::make_shared<nn::WNetModel>(nn::build_model({2, 2, 1, 2}, 5));
  const Detector det(model, {}, nn::Precision::f64);
  const auto d = det.predict_density(ramp(13, 21));
  EXPECT_EQ(d.height(), 13);
  EXPECT_EQ(d.width(), 21);
  for (double v : d.data()) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  const auto det2 = det.detect(ramp(13, 21));
  EXPECT_EQ(det2.image_id, "t");
}

}  // namespace
}  // namespace wnet::detect
