#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "wnet/error.hpp"
#include "wnet/train/config.hpp"

namespace wnet::train {

void SplitRatios::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0) throw Error(ErrorKind::config, "split ratios must be >= 0");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw Error(ErrorKind::config, "split ratios must sum to 1");
}

void TrainConfig::validate() const {
  if (!(min_lr > 0.0 && min_lr <= initial_lr)) throw Error(ErrorKind::config, "need 0 < min_lr <= initial_lr");
  if (!(check_fraction > 0.0 && check_fraction <= 1.0)) {
    throw Error(ErrorKind::config, "check_fraction must be in (0,1]");
  }
  if (!(lr_decay > 0.0 && lr_decay < 1.0)) throw Error(ErrorKind::config, "lr_decay must be in (0,1)");
  if (plateau_patience < 1) throw Error(ErrorKind::config, "plateau_patience must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::config, "batch_size must be >= 1");
  if (max_epochs < 0) throw Error(ErrorKind::config, "max_epochs must be >= 0");
  if (max_steps < 0) throw Error(ErrorKind::config, "max_steps must be >= 0");
  if (stage2_warmup_steps < 0) throw Error(ErrorKind::config, "stage2_warmup_steps must be >= 0");
  if (num_threads < 1) throw Error(ErrorKind::config, "num_threads must be >= 1");
  split.validate();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::config, "config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename T, typename Get>
Setter number(Get get) {
  return [get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = parse_number<T>(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"initial_lr", number<double>([](RunConfig& c) -> double& { return c.train.initial_lr; })},
      {"min_lr", number<double>([](RunConfig& c) -> double& { return c.train.min_lr; })},
      {"check_fraction", number<double>([](RunConfig& c) -> double& { return c.train.check_fraction; })},
      {"plateau_patience", number<int>([](RunConfig& c) -> int& { return c.train.plateau_patience; })},
      {"lr_decay", number<double>([](RunConfig& c) -> double& { return c.train.lr_decay; })},
      {"batch_size", number<int>([](RunConfig& c) -> int& { return c.train.batch_size; })},
      {"max_epochs", number<int>([](RunConfig& c) -> int& { return c.train.max_epochs; })},
      {"max_steps", number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.train.max_steps; })},
      {"stage2_warmup_steps",
       number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.train.stage2_warmup_steps; })},
      {"seed", number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.train.seed; })},
      {"train_ratio", number<double>([](RunConfig& c) -> double& { return c.train.split.train; })},
      {"val_ratio", number<double>([](RunConfig& c) -> double& { return c.train.split.val; })},
      {"test_ratio", number<double>([](RunConfig& c) -> double& { return c.train.split.test; })},
      {"num_threads", number<int>([](RunConfig& c) -> int& { return c.train.num_threads; })},
      {"precision",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "f32") c.train.precision = nn::Precision::f32;
         else if (v == "f64") c.train.precision = nn::Precision::f64;
         else throw Error(ErrorKind::config, "config key '" + k + "' must be f32 or f64");
       }},
      {"l1_ratio",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "auto") c.loss.l1_ratio.reset();
         else c.loss.l1_ratio = parse_number<double>(k, v);
       }},
      {"stage1_levels", number<int>([](RunConfig& c) -> int& { return c.model.stage1_levels; })},
      {"stage1_base_channels", number<int>([](RunConfig& c) -> int& { return c.model.stage1_base_channels; })},
      {"stage2_levels", number<int>([](RunConfig& c) -> int& { return c.model.stage2_levels; })},
      {"stage2_base_channels", number<int>([](RunConfig& c) -> int& { return c.model.stage2_base_channels; })},
      {"radius_px", number<double>([](RunConfig& c) -> double& { return c.density.radius_px; })},
      {"sharpness", number<double>([](RunConfig& c) -> double& { return c.density.sharpness; })},
      {"dot_radius", number<double>([](RunConfig& c) -> double& { return c.density.dot_radius; })},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorKind::config, "unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.train.validate();
  cfg.model.validate();
  cfg.density.validate();
  if (cfg.loss.l1_ratio) (void)cfg.loss.resolved_ratio();
  return cfg;
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "initial_lr = " << c.train.initial_lr << "\n"
     << "min_lr = " << c.train.min_lr << "\n"
     << "check_fraction = " << c.train.check_fraction << "\n"
     << "plateau_patience = " << c.train.plateau_patience << "\n"
     << "lr_decay = " << c.train.lr_decay << "\n"
     << "batch_size = " << c.train.batch_size << "\n"
     << "max_epochs = " << c.train.max_epochs << "\n"
     << "max_steps = " << c.train.max_steps << "\n"
     << "stage2_warmup_steps = " << c.train.stage2_warmup_steps << "\n"
     << "seed = " << c.train.seed << "\n"
     << "train_ratio = " << c.train.split.train << "\n"
     << "val_ratio = " << c.train.split.val << "\n"
     << "test_ratio = " << c.train.split.test << "\n"
     << "num_threads = " << c.train.num_threads << "\n"
     << "precision = " << (c.train.precision == nn::Precision::f32 ? "f32" : "f64") << "\n";
  if (c.loss.l1_ratio) os << "l1_ratio = " << *c.loss.l1_ratio << "\n";
  else os << "l1_ratio = auto\n";
  os << "stage1_levels = " << c.model.stage1_levels << "\n"
     << "stage1_base_channels = " << c.model.stage1_base_channels << "\n"
     << "stage2_levels = " << c.model.stage2_levels << "\n"
     << "stage2_base_channels = " << c.model.stage2_base_channels << "\n"
     << "radius_px = " << c.density.radius_px << "\n"
     << "sharpness = " << c.density.sharpness << "\n"
     << "dot_radius = " << c.density.dot_radius << "\n";
  return os.str();
}

}  // namespace wnet::train
