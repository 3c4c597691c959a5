#include "wnet/nn/model.hpp"

#include <cmath>

#include "graph.hpp"
#include "wnet/error.hpp"
#include "wnet/rng.hpp"

namespace wnet::nn {

void WNetConfig::validate() const {
  if (stage1_levels < 1 || stage2_levels < 1) throw Error(ErrorKind::config, "stage levels must be >= 1");
  if (stage1_base_channels < 1 || stage2_base_channels < 1) {
    throw Error(ErrorKind::config, "stage base channels must be >= 1");
  }
  if (stage1_levels > 10 || stage2_levels > 10) throw Error(ErrorKind::config, "stage levels must be <= 10");
}

int WNetConfig::size_multiple() const { return 1 << std::max(stage1_levels, stage2_levels); }

std::string_view to_string(Architecture arch) {
  return arch == Architecture::wnet ? "wnet" : "single_stage";
}

Architecture architecture_from_string(std::string_view name) {
  if (name == "wnet") return Architecture::wnet;
  if (name == "single_stage") return Architecture::single_stage;
  throw Error(ErrorKind::config, "unknown architecture '" + std::string(name) + "'");
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

void add_conv(ParamStore& store, Rng& rng, const std::string& name, int cin, int cout, int k, double bias = 0.0) {
  const double bound = std::sqrt(6.0 / (static_cast<double>(cin) * k * k));
  std::vector<double> w(static_cast<std::size_t>(cout) * cin * k * k);
  for (double& v : w) v = rng.uniform(-bound, bound);
  store.add(name + ".weight", {cout, cin, k, k}, std::move(w));
  store.add(name + ".bias", {cout}, std::vector<double>(cout, bias));
}

void add_stage(ParamStore& store, Rng& rng, const std::string& prefix, int in_channels, int levels, int base,
               double head_prior) {
  int c_in = in_channels;
  for (int l = 0; l < levels; ++l) {
    const int c = base << l;
    const std::string name = prefix + "enc" + std::to_string(l);
    add_conv(store, rng, name + ".conv1", c_in, c, 3);
    add_conv(store, rng, name + ".conv2", c, c, 3);
    c_in = c;
  }
  const int mid = base << levels;
  add_conv(store, rng, prefix + "mid.conv1", c_in, mid, 3);
  add_conv(store, rng, prefix + "mid.conv2", mid, mid, 3);
  c_in = mid;
  for (int l = levels - 1; l >= 0; --l) {
    const int c = base << l;
    const std::string name = prefix + "dec" + std::to_string(l);
    add_conv(store, rng, name + ".conv1", c_in + c, c, 3);
    add_conv(store, rng, name + ".conv2", c, c, 3);
    c_in = c;
  }
  add_conv(store, rng, prefix + "head", c_in, 1, 1, logit(head_prior));
}

}  // namespace

std::size_t WNetModel::stage_parameter_count(int stage) const {
  const std::string prefix = "stage" + std::to_string(stage) + ".";
  std::size_t n = 0;
  for (const auto& p : params.items()) {
    if (p.name.rfind(prefix, 0) == 0) n += p.count();
  }
  return n;
}

int WNetModel::input_multiple() const {
  return has_stage2() ? config.size_multiple() : (1 << config.stage1_levels);
}

WNetModel build_model(const WNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  WNetModel m;
  m.architecture = Architecture::wnet;
  m.config = cfg;
  m.seed = seed;
  Rng rng(seed);
  add_stage(m.params, rng, "stage1.", 3, cfg.stage1_levels, cfg.stage1_base_channels, kMaskHeadPrior);
  add_stage(m.params, rng, "stage2.", 1, cfg.stage2_levels, cfg.stage2_base_channels, kDensityHeadPrior);
  return m;
}

WNetModel build_single_stage_model(const WNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  WNetModel m;
  m.architecture = Architecture::single_stage;
  m.config = cfg;
  m.seed = seed;
  Rng rng(seed);
  add_stage(m.params, rng, "stage1.", 3, cfg.stage1_levels, cfg.stage1_base_channels, kDensityHeadPrior);
  return m;
}

namespace {

template <typename T>
ForwardResult forward_impl(const WNetModel& model, const ImageTile& tile) {
  const detail::FlushDenormals ftz;
  Tape<T> tape(model.params);
  const auto out = detail::build_graph<T>(tape, model, tile);
  return {detail::tensor_to_mask(tape.value(out.stage1), tile.id()),
          detail::tensor_to_mask(tape.value(out.stage2), tile.id())};
}

template <typename T>
DensityMask stage1_impl(const WNetModel& model, const ImageTile& tile) {
  detail::check_input_shape(model, tile.height(), tile.width());
  const detail::FlushDenormals ftz;
  Tape<T> tape(model.params);
  const auto in = tape.input(detail::tile_to_tensor<T>(tile));
  const auto s1 = detail::build_stage<T>(tape, in, "stage1.", model.config.stage1_levels);
  return detail::tensor_to_mask(tape.value(s1), tile.id());
}

}  // namespace

ForwardResult forward(const WNetModel& model, const ImageTile& tile, Precision precision) {
  return precision == Precision::f32 ? forward_impl<float>(model, tile) : forward_impl<double>(model, tile);
}

DensityMask forward_stage1(const WNetModel& model, const ImageTile& tile, Precision precision) {
  return precision == Precision::f32 ? stage1_impl<float>(model, tile) : stage1_impl<double>(model, tile);
}

}  // namespace wnet::nn
