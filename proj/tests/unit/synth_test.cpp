#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "wnet/codec.hpp"
#include "wnet/detect/peaks.hpp"
#include "wnet/error.hpp"
#include "wnet/masks.hpp"
#include "wnet/synth.hpp"
#include "wnet/train/split.hpp"

namespace wnet::synth {
namespace {

bool inside(const Nucleus& n, double px, double py) {
  const double dx = px - n.x, dy = py - n.y;
  const double u = (dx * std::cos(n.angle) + dy * std::sin(n.angle)) / n.semi_major;
  const double v = (-dx * std::sin(n.angle) + dy * std::cos(n.angle)) / n.semi_minor;
  return u * u + v * v <= 1.0;
}

TEST(Synth, Deterministic) {
  for (auto d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
    const auto spec = SceneSpec::preset(d, 77);
    const auto a = generate(spec), b = generate(spec);
    EXPECT_EQ(encode_tile(a.tile), encode_tile(b.tile));
    EXPECT_EQ(a.truth, b.truth);
  }
  EXPECT_NE(encode_tile(generate(SceneSpec::preset(Difficulty::easy, 1)).tile),
            encode_tile(generate(SceneSpec::preset(Difficulty::easy, 2)).tile));
}

TEST(Synth, EasyCountsAndSpacing) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = generate(SceneSpec::preset(Difficulty::easy, seed));
    ASSERT_GE(s.truth.size(), 10u);
    ASSERT_LE(s.truth.size(), 40u);
    const auto& p = s.truth.points();
    for (std::size_t i = 0; i < p.size(); ++i) {
      ASSERT_GE(p[i].x, 0.0);
      ASSERT_LT(p[i].x, 128.0);
      ASSERT_GE(p[i].y, 0.0);
      ASSERT_LT(p[i].y, 128.0);
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        ASSERT_GE(std::hypot(p[i].x - p[j].x, p[i].y - p[j].y), 1.5 * 8.0);
      }
    }
  }
}

TEST(Synth, HardModeHasTouchingPairs) {
  auto spec = SceneSpec::preset(Difficulty::hard, 5);
  spec.min_count = spec.max_count = 20;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto s = generate(spec);
    int paired = 0;
    for (std::size_t i = 0; i < s.nuclei.size(); ++i) {
      const auto& n = s.nuclei[i];
      if (n.partner < 0) continue;
      ++paired;
      const auto& m = s.nuclei[static_cast<std::size_t>(n.partner)];
      EXPECT_EQ(m.partner, static_cast<int>(i));
      EXPECT_LT(std::hypot(n.x - m.x, n.y - m.y), n.semi_major + m.semi_major);
    }
    EXPECT_GE(paired, 6) << "seed " << seed;
  }
}

TEST(Synth, CentersAreEllipseCenters) {
  const auto s = generate(SceneSpec::preset(Difficulty::medium, 3));
  ASSERT_EQ(s.nuclei.size(), s.truth.size());
  for (std::size_t i = 0; i < s.nuclei.size(); ++i) {
    EXPECT_EQ(s.truth.points()[i].x, s.nuclei[i].x);
    EXPECT_EQ(s.truth.points()[i].y, s.nuclei[i].y);
    EXPECT_LE(s.nuclei[i].semi_major, 2.0 * s.nuclei[i].semi_minor + 1e-12);
  }
}

TEST(Synth, ColorSeparationMeetsContrast) {
  for (auto d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto spec = SceneSpec::preset(d, seed);
      const auto s = generate(spec);
      double in = 0, out = 0;
      int n_in = 0, n_out = 0;
      for (int r = 0; r < s.tile.height(); ++r) {
        for (int c = 0; c < s.tile.width(); ++c) {
          const double v = (s.tile.at(r, c, 0) + s.tile.at(r, c, 1) + s.tile.at(r, c, 2)) / 3.0;
          const bool hit = std::any_of(s.nuclei.begin(), s.nuclei.end(), [&](const Nucleus& n) { return inside(n, c, r); });
          (hit ? in : out) += v;
          ++(hit ? n_in : n_out);
        }
      }
      ASSERT_GT(n_in, 0);
      EXPECT_GE(out / n_out - in / n_in, spec.contrast) << to_string(d) << " seed " << seed;
    }
  }
}

TEST(Synth, DatasetIdsAndManifest) {
  auto spec = SceneSpec::preset(Difficulty::easy);
  spec.height = spec.width = 32;
  spec.min_count = 1;
  spec.max_count = 3;
  spec.max_radius = 4.0;
  const auto data = generate_dataset(1000, spec, 10);
  std::set<std::string> ids;
  for (const auto& s : data) ids.insert(s.tile.id());
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_EQ(data[7].tile.id(), sample_id(7));
  EXPECT_EQ(data[7].truth.image_id(), sample_id(7));
  EXPECT_EQ(data[7].spec.seed, 17u);
  const auto manifest = write_manifest(data, 10);
  EXPECT_EQ(manifest, write_manifest(generate_dataset(1000, spec, 10), 10));
  const auto doc = nlohmann::json::parse(manifest);
  EXPECT_EQ(doc["samples"].size(), 1000u);
  EXPECT_EQ(doc["samples"][3]["count"].get<std::size_t>(), data[3].truth.size());
}

TEST(Synth, SingleSampleCannotBeSplit) {
  const auto one = generate_dataset(1, SceneSpec::preset(Difficulty::easy), 0);
  try {
    (void)train::split_dataset({one[0].tile.id()}, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(Synth, DensityIsOneAtEveryTruthPixel) {
  const auto data = generate_dataset(50, SceneSpec::preset(Difficulty::easy), 400);
  for (const auto& s : data) {
    const auto m = render_density(s.truth, s.tile.height(), s.tile.width(), {});
    for (const auto& p : s.truth.points()) ASSERT_EQ(m.at(raster_index(p.y), raster_index(p.x)), 1.0);
  }
}

TEST(Synth, GroundTruthPeaksRecoverCenters) {
  for (auto d : {Difficulty::easy, Difficulty::medium}) {
    const auto data = generate_dataset(50, SceneSpec::preset(d), 900);
    for (const auto& s : data) {
      const auto det = detect::extract_peaks(render_density(s.truth, 128, 128, {}), {});
      ASSERT_EQ(det.centers.size(), s.truth.size());
      for (const auto& p : s.truth.points()) {
        ASSERT_TRUE(std::any_of(det.centers.begin(), det.centers.end(), [&](const detect::Center& c) {
          return std::hypot(c.x - p.x, c.y - p.y) <= 1.0;
        }));
      }
    }
  }
}

TEST(Synth, InfeasibleSpecFailsPlacement) {
  auto spec = SceneSpec::preset(Difficulty::easy);
  spec.height = spec.width = 16;
  spec.min_count = spec.max_count = 40;
  try {
    (void)generate(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::placement);
  }
}

TEST(Synth, SpecValidation) {
  auto spec = SceneSpec::preset(Difficulty::easy);
  spec.min_count = 0;
  EXPECT_THROW(spec.validate(), Error);
  spec = SceneSpec::preset(Difficulty::easy);
  spec.adhesion_fraction = 1.5;
  EXPECT_THROW(spec.validate(), Error);
  EXPECT_EQ(difficulty_from_string("hard"), Difficulty::hard);
  EXPECT_THROW(difficulty_from_string("extreme"), Error);
}

}  // namespace
}  // namespace wnet::synth
