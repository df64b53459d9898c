#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rlab::cli {

// Seed used by every subcommand when --seed is omitted.
inline constexpr std::uint64_t kDefaultSeed = 7;

// Exit codes: 0 success, 1 runtime failure or partial run, 2 bad usage.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::vector<std::string> subcommand_names();

}  // namespace rlab::cli
