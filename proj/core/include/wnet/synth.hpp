#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wnet/image.hpp"

namespace wnet::synth {

enum class Difficulty { easy, medium, hard };

std::string_view to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view name);

/// Procedural scene parameters. `contrast` is the minimum gap between mean
/// nucleus intensity and mean background intensity (intensity = RGB mean).
struct SceneSpec {
  std::uint64_t seed = 0;
  int height = 128;
  int width = 128;
  int min_count = 10;
  int max_count = 40;
  double min_radius = 3.0;
  double max_radius = 8.0;
  Difficulty difficulty = Difficulty::easy;
  double adhesion_fraction = 0.0;
  double contrast = 0.35;

  /// Defaults for a difficulty: adhesion 0 / 0.2 / 0.35, contrast 0.35 / 0.25 / 0.08.
  static SceneSpec preset(Difficulty d, std::uint64_t seed = 0);
  void validate() const;
};

/// Separation enforced between nuclei that are not an adhering pair, as a
/// multiple of max_radius.
inline constexpr double kMinSpacingFactor = 1.5;
/// Rejection-sampling budget per scene.
inline constexpr int kPlacementBudget = 100000;

struct Nucleus {
  double x = 0.0;
  double y = 0.0;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;
  int partner = -1;  // index of the touching partner, -1 when isolated
};

struct SyntheticSample {
  ImageTile tile;
  PointSet truth;
  SceneSpec spec;
  std::vector<Nucleus> nuclei;
};

/// Pure function of `spec`. Nucleus centers lie on pixel centers (integer
/// coordinates). Throws placement when fewer than min_count
/// nuclei fit within kPlacementBudget attempts.
SyntheticSample generate(const SceneSpec& spec);

/// Sample i uses `tmpl` with seed `seed + i` and id "tile_<i>" (zero-padded).
std::vector<SyntheticSample> generate_dataset(int n, const SceneSpec& tmpl, std::uint64_t seed);

std::string sample_id(int index);

/// `{"seed": ..., "samples": [{"id", "seed", "difficulty", "count"}, ...]}`
std::string write_manifest(const std::vector<SyntheticSample>& samples, std::uint64_t seed);

}  // namespace wnet::synth
