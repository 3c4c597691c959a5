#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wnet/train/config.hpp"

namespace wnet::train {

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// Seeded shuffle, then floor(n * ratio) ids each for validation and test;
/// the remainder goes to training. Throws config for fewer than 3 ids.
DatasetSplit split_dataset(const std::vector<std::string>& ids, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace wnet::train
