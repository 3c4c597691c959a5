#include "wnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "wnet/error.hpp"
#include "wnet/rng.hpp"

namespace wnet::synth {

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
  }
  return "easy";
}

Difficulty difficulty_from_string(std::string_view name) {
  if (name == "easy") return Difficulty::easy;
  if (name == "medium") return Difficulty::medium;
  if (name == "hard") return Difficulty::hard;
  throw Error(ErrorKind::config, "unknown difficulty '" + std::string(name) + "'");
}

SceneSpec SceneSpec::preset(Difficulty d, std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.difficulty = d;
  switch (d) {
    case Difficulty::easy:
      s.adhesion_fraction = 0.0;
      s.contrast = 0.35;
      break;
    case Difficulty::medium:
      s.adhesion_fraction = 0.2;
      s.contrast = 0.25;
      break;
    case Difficulty::hard:
      s.adhesion_fraction = 0.35;
      s.contrast = 0.08;
      break;
  }
  return s;
}

void SceneSpec::validate() const {
  if (height < 8 || width < 8) throw Error(ErrorKind::config, "scene must be at least 8x8");
  if (min_count < 1 || max_count < min_count) throw Error(ErrorKind::config, "need 1 <= min_count <= max_count");
  if (!(min_radius > 0.0) || max_radius < min_radius) {
    throw Error(ErrorKind::config, "need 0 < min_radius <= max_radius");
  }
  if (!(adhesion_fraction >= 0.0 && adhesion_fraction <= 1.0)) {
    throw Error(ErrorKind::config, "adhesion_fraction must be in [0,1]");
  }
  if (!(contrast >= 0.0 && contrast <= 0.45)) throw Error(ErrorKind::config, "contrast must be in [0,0.45]");
}

namespace {

using Rgb = std::array<double, 3>;
constexpr Rgb kBackground{0.93, 0.80, 0.85};
constexpr Rgb kNucleus{0.36, 0.24, 0.55};
// Adhering pairs need centers at least this far apart so each keeps its own
// density peak after rasterization.
constexpr double kMinPairDistance = 6.0;

double intensity(const Rgb& c) { return (c[0] + c[1] + c[2]) / 3.0; }

class Placer {
 public:
  Placer(const SceneSpec& spec, Rng& rng) : spec_(spec), rng_(rng) {}

  bool budget_left() const { return attempts_ < kPlacementBudget; }

  bool try_single() {
    ++attempts_;
    Nucleus n = shape(spec_.min_radius);
    n.x = rng_.between(0, spec_.width - 1);
    n.y = rng_.between(0, spec_.height - 1);
    if (!clear_of_all(n.x, n.y)) return false;
    nuclei_.push_back(n);
    return true;
  }

  bool try_pair() {
    ++attempts_;
    // Radii of at least 4 px leave room for a touching gap >= kMinPairDistance.
    const double rmin = std::min(std::max(spec_.min_radius, 4.0), spec_.max_radius);
    Nucleus a = shape(rmin), b = shape(rmin);
    const double reach = a.semi_major + b.semi_major;
    const double lo = std::max(kMinPairDistance, 0.55 * reach);
    const double hi = 0.9 * reach;
    if (hi <= lo) return false;
    const double dist = rng_.uniform(lo, hi);
    const double phi = rng_.uniform(0.0, 2.0 * std::numbers::pi);
    a.x = rng_.between(0, spec_.width - 1);
    a.y = rng_.between(0, spec_.height - 1);
    b.x = std::round(a.x + dist * std::cos(phi));
    b.y = std::round(a.y + dist * std::sin(phi));
    const double gap = std::hypot(b.x - a.x, b.y - a.y);
    if (gap < kMinPairDistance || gap >= reach) return false;
    if (b.x < 0.0 || b.x > spec_.width - 1.0 || b.y < 0.0 || b.y > spec_.height - 1.0) return false;
    if (!clear_of_all(a.x, a.y) || !clear_of_all(b.x, b.y)) return false;
    const int ia = static_cast<int>(nuclei_.size());
    a.partner = ia + 1;
    b.partner = ia;
    nuclei_.push_back(a);
    nuclei_.push_back(b);
    return true;
  }

  std::vector<Nucleus> take() { return std::move(nuclei_); }
  std::size_t placed() const { return nuclei_.size(); }

 private:
  Nucleus shape(double rmin) {
    Nucleus n;
    n.semi_major = rng_.uniform(rmin, spec_.max_radius);
    n.semi_minor = n.semi_major * rng_.uniform(0.5, 1.0);
    n.angle = rng_.uniform(0.0, std::numbers::pi);
    return n;
  }

  bool clear_of_all(double x, double y) const {
    const double spacing = kMinSpacingFactor * spec_.max_radius;
    for (const Nucleus& o : nuclei_) {
      if (std::hypot(o.x - x, o.y - y) < spacing) return false;
    }
    return true;
  }

  const SceneSpec& spec_;
  Rng& rng_;
  int attempts_ = 0;
  std::vector<Nucleus> nuclei_;
};

bool inside(const Nucleus& n, double px, double py) {
  const double dx = px - n.x, dy = py - n.y;
  const double c = std::cos(n.angle), s = std::sin(n.angle);
  const double u = (dx * c + dy * s) / n.semi_major;
  const double v = (-dx * s + dy * c) / n.semi_minor;
  return u * u + v * v <= 1.0;
}

std::vector<double> render(const SceneSpec& spec, const std::vector<Nucleus>& nuclei, Rng& rng) {
  const int h = spec.height, w = spec.width;
  std::vector<double> data(static_cast<std::size_t>(h) * w * 3);

  // Eosin-like field with a few low-frequency waves.
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::array<Wave, 4> waves{};
  for (auto& wv : waves) {
    const double wavelength = rng.uniform(32.0, 96.0);
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    wv = {2.0 * std::numbers::pi / wavelength * std::cos(dir), 2.0 * std::numbers::pi / wavelength * std::sin(dir),
          rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(0.01, 0.025)};
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double low = 0.0;
      for (const auto& wv : waves) low += wv.amp * std::cos(wv.kx * c + wv.ky * r + wv.phase);
      for (int ch = 0; ch < 3; ++ch) {
        data[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = kBackground[ch] + low + rng.uniform(-0.015, 0.015);
      }
    }
  }

  // Separation scale so the nucleus/background intensity gap exceeds the
  // contrast parameter by a margin that absorbs jitter and noise.
  const double base_gap = intensity(kBackground) - intensity(kNucleus);
  const double blend = std::min(1.0, (spec.contrast + 0.06) / base_gap);
  std::vector<Rgb> colors;
  for (std::size_t i = 0; i < nuclei.size(); ++i) {
    Rgb col;
    for (int ch = 0; ch < 3; ++ch) {
      const double jittered = kNucleus[ch] + rng.uniform(-0.04, 0.04);
      col[ch] = kBackground[ch] + blend * (jittered - kBackground[ch]);
    }
    colors.push_back(col);
  }

  std::vector<int> cover(static_cast<std::size_t>(h) * w, 0);
  std::vector<int> first(static_cast<std::size_t>(h) * w, -1);
  for (std::size_t i = 0; i < nuclei.size(); ++i) {
    const Nucleus& n = nuclei[i];
    const int r0 = std::max(0, static_cast<int>(std::floor(n.y - n.semi_major)));
    const int r1 = std::min(h - 1, static_cast<int>(std::ceil(n.y + n.semi_major)));
    const int c0 = std::max(0, static_cast<int>(std::floor(n.x - n.semi_major)));
    const int c1 = std::min(w - 1, static_cast<int>(std::ceil(n.x + n.semi_major)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (!inside(n, c, r)) continue;
        const std::size_t idx = static_cast<std::size_t>(r) * w + c;
        if (cover[idx]++ == 0) first[idx] = static_cast<int>(i);
      }
    }
  }
  for (std::size_t idx = 0; idx < cover.size(); ++idx) {
    if (cover[idx] == 0) continue;
    // Stacked nuclei render darker where they overlap.
    const double shade = cover[idx] > 1 ? 0.85 : 1.0;
    const Rgb& col = colors[static_cast<std::size_t>(first[idx])];
    for (int ch = 0; ch < 3; ++ch) data[idx * 3 + ch] = col[ch] * shade + rng.uniform(-0.02, 0.02);
  }
  for (double& v : data) v = std::clamp(v, 0.0, 1.0);
  return data;
}

}  // namespace

std::string sample_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tile_%05d", index);
  return buf;
}

SyntheticSample generate(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int target = rng.between(spec.min_count, spec.max_count);
  int paired = 2 * static_cast<int>(std::ceil(spec.adhesion_fraction * target / 2.0));
  if (paired > target) paired -= 2;

  Placer placer(spec, rng);
  while (static_cast<int>(placer.placed()) < paired && placer.budget_left()) placer.try_pair();
  while (static_cast<int>(placer.placed()) < target && placer.budget_left()) placer.try_single();
  if (static_cast<int>(placer.placed()) < std::max(spec.min_count, paired)) {
    throw Error(ErrorKind::placement, "placed only " + std::to_string(placer.placed()) + " of " +
                                          std::to_string(target) + " nuclei within " +
                                          std::to_string(kPlacementBudget) + " attempts");
  }
  std::vector<Nucleus> nuclei = placer.take();

  std::vector<Point> centers;
  centers.reserve(nuclei.size());
  for (const Nucleus& n : nuclei) centers.push_back({n.x, n.y});
  const std::string id = "seed_" + std::to_string(spec.seed);
  std::vector<double> pixels = render(spec, nuclei, rng);
  return SyntheticSample{ImageTile(id, spec.height, spec.width, std::move(pixels)), PointSet(id, std::move(centers)),
                         spec, std::move(nuclei)};
}

std::vector<SyntheticSample> generate_dataset(int n, const SceneSpec& tmpl, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::config, "dataset size must be >= 1");
  std::vector<SyntheticSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SceneSpec spec = tmpl;
    spec.seed = seed + static_cast<std::uint64_t>(i);
    try {
      SyntheticSample s = generate(spec);
      const std::string id = sample_id(i);
      s.tile = s.tile.with_id(id);
      s.truth = PointSet(id, s.truth.points());
      out.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error(e.kind(), "sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::string write_manifest(const std::vector<SyntheticSample>& samples, std::uint64_t seed) {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    doc["samples"].push_back({{"id", s.tile.id()},
                              {"seed", s.spec.seed},
                              {"difficulty", std::string(to_string(s.spec.difficulty))},
                              {"count", s.truth.size()}});
  }
  return doc.dump(2);
}

}  // namespace wnet::synth
