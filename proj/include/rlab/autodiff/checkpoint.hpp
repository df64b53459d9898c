#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "rlab/autodiff/tape.hpp"

namespace rlab::ad {

// Binary container of named float64 tensors:
//
//   "RLABCKPT"                8-byte magic
//   u32 version               little-endian, currently 1
//   u64 header_length         little-endian
//   header                    JSON: {"version", "metadata",
//                                    "tensors": [{"name","shape","offset","count"}]}
//   data                      float64 little-endian; offsets in bytes from data start
struct Checkpoint {
  ParameterStore params;
  nlohmann::json metadata = nlohmann::json::object();
};

inline constexpr char kCheckpointMagic[8] = {'R', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ParameterStore& params, const nlohmann::json& metadata);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Throw IoError on file failures, FormatError on malformed content.
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const nlohmann::json& metadata);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rlab::ad
