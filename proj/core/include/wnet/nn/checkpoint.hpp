#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "wnet/nn/model.hpp"

namespace wnet::nn {

/// Layout: the 8-byte magic "WNETCKPT", a little-endian u32 format version,
/// a little-endian u64 header length, a JSON header (architecture, config,
/// seed, training metadata, parameter names and shapes), then every
/// parameter's values as little-endian IEEE-754 binary64 in header order.
inline constexpr char kCheckpointMagic[8] = {'W', 'N', 'E', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::optional<double> l1_ratio;
  std::uint64_t step = 0;
  std::optional<double> val_loss;
  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  WNetModel model;
  CheckpointMeta meta;
};

std::vector<std::uint8_t> encode_checkpoint(const WNetModel& model, const CheckpointMeta& meta = {});
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const WNetModel& model, const CheckpointMeta& meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wnet::nn
