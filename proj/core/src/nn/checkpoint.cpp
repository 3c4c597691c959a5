#include "wnet/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "wnet/codec.hpp"
#include "wnet/error.hpp"

namespace wnet::nn {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}
std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorKind::format, "checkpoint: " + what);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const WNetModel& model, const CheckpointMeta& meta) {
  nlohmann::json header;
  header["architecture"] = std::string(to_string(model.architecture));
  header["config"] = {{"stage1_levels", model.config.stage1_levels},
                      {"stage1_base_channels", model.config.stage1_base_channels},
                      {"stage2_levels", model.config.stage2_levels},
                      {"stage2_base_channels", model.config.stage2_base_channels}};
  header["seed"] = model.seed;
  header["meta"] = {{"step", meta.step}};
  if (meta.l1_ratio) header["meta"]["l1_ratio"] = *meta.l1_ratio;
  if (meta.val_loss) header["meta"]["val_loss"] = *meta.val_loss;
  header["params"] = nlohmann::json::array();
  for (const auto& p : model.params.items()) header["params"].push_back({{"name", p.name}, {"shape", p.shape}});
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + model.params.total_count() * 8);
  for (const auto& p : model.params.items()) {
    for (double v : p.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) corrupt("bad magic");
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kCheckpointVersion) corrupt("unsupported version " + std::to_string(version));
  const std::uint64_t header_len = get_u64(bytes, 12);
  if (header_len > bytes.size() - 20) corrupt("header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 20, bytes.begin() + 20 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("header: ") + e.what());
  }

  Checkpoint ck;
  try {
    ck.model.architecture = architecture_from_string(header.at("architecture").get<std::string>());
    const auto& c = header.at("config");
    ck.model.config.stage1_levels = c.at("stage1_levels").get<int>();
    ck.model.config.stage1_base_channels = c.at("stage1_base_channels").get<int>();
    ck.model.config.stage2_levels = c.at("stage2_levels").get<int>();
    ck.model.config.stage2_base_channels = c.at("stage2_base_channels").get<int>();
    ck.model.seed = header.at("seed").get<std::uint64_t>();
    const auto& m = header.at("meta");
    ck.meta.step = m.at("step").get<std::uint64_t>();
    if (m.contains("l1_ratio")) ck.meta.l1_ratio = m["l1_ratio"].get<double>();
    if (m.contains("val_loss")) ck.meta.val_loss = m["val_loss"].get<double>();

    std::size_t at = 20 + header_len;
    for (const auto& p : header.at("params")) {
      auto shape = p.at("shape").get<std::vector<int>>();
      std::size_t n = 1;
      for (int d : shape) {
        if (d <= 0) corrupt("non-positive dimension");
        n *= static_cast<std::size_t>(d);
      }
      if ((bytes.size() - at) / 8 < n) corrupt("truncated parameter data");
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i, at += 8) values[i] = std::bit_cast<double>(get_u64(bytes, at));
      ck.model.params.add(p.at("name").get<std::string>(), std::move(shape), std::move(values));
    }
    if (at != bytes.size()) corrupt("trailing bytes after parameter data");
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("header field: ") + e.what());
  }
  ck.model.config.validate();
  const WNetModel reference = ck.model.architecture == Architecture::wnet
                                  ? build_model(ck.model.config, 0)
                                  : build_single_stage_model(ck.model.config, 0);
  if (reference.params.size() != ck.model.params.size()) corrupt("parameter list does not match the architecture");
  for (std::size_t i = 0; i < reference.params.size(); ++i) {
    const auto& want = reference.params.items()[i];
    const auto& got = ck.model.params.items()[i];
    if (want.name != got.name || want.shape != got.shape) {
      corrupt("parameter " + got.name + " does not match the architecture (expected " + want.name + ")");
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const WNetModel& model, const CheckpointMeta& meta) {
  write_file_atomic(path, encode_checkpoint(model, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace wnet::nn
