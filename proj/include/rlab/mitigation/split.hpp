#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rlab::mitigation {

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded permutation of [0, n); the first round(train_fraction * n) indices
// train, the rest test. Both sides keep at least one index when n >= 2.
HoldoutSplit holdout_split(std::size_t n, double train_fraction, std::uint64_t seed);

// Splits whole groups: every index sharing a group id lands on the same side.
// groups[i] is the group of index i. Indices are returned in ascending order.
HoldoutSplit grouped_holdout_split(std::span<const std::size_t> groups, double train_fraction, std::uint64_t seed);

}  // namespace rlab::mitigation
