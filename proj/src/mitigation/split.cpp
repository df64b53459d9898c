#include "rlab/mitigation/split.hpp"

#include <algorithm>
#include <cmath>

#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"

namespace rlab::mitigation {

HoldoutSplit holdout_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  if (n < 2) throw SizeError("a holdout split needs at least 2 instances");
  auto order = iota_indices(n);
  Rng rng(seed);
  rng.shuffle(order);
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);
  HoldoutSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return s;
}

HoldoutSplit grouped_holdout_split(std::span<const std::size_t> groups, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> ids(groups.begin(), groups.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw SizeError("a grouped holdout split needs at least 2 groups");
  const auto by_group = holdout_split(ids.size(), train_fraction, seed);
  std::vector<char> in_train(ids.size(), 0);
  for (auto g : by_group.train) in_train[g] = 1;
  HoldoutSplit s;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto g = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), groups[i]) - ids.begin());
    (in_train[g] ? s.train : s.test).push_back(i);
  }
  return s;
}

}  // namespace rlab::mitigation
