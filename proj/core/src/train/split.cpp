#include "wnet/train/split.hpp"

#include <cmath>

#include "wnet/error.hpp"
#include "wnet/rng.hpp"

namespace wnet::train {

DatasetSplit split_dataset(const std::vector<std::string>& ids, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  if (ids.size() < 3) {
    throw Error(ErrorKind::config, "cannot split " + std::to_string(ids.size()) + " ids into train/val/test");
  }
  std::vector<std::string> order = ids;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n = static_cast<double>(order.size());
  // The tiny slack keeps e.g. 1000 * 0.2 from flooring to 199.
  const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.val + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios.test + 1e-9));
  DatasetSplit out;
  out.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                  order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), order.end());
  return out;
}

}  // namespace wnet::train
