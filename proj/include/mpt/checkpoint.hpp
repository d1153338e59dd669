#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mpt/netcore.hpp"

namespace mpt {

/// Binary checkpoint layout (all integers and reals little-endian):
///
///   "MPTF"                       4 magic bytes
///   u32 version                  currently 1
///   u32 num_labels
///   u32 input rank, u32 dims...
///   u32 layer count, then per layer a u32 tag followed by its dims:
///       0 dense   in_dim out_dim
///       1 conv2d  in_channels out_channels kernel_size stride
///       2 crelu
///       3 flatten
///   u64 parameter count
///   f64 values...
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkSpec spec;
  ParameterVector params;
};

std::vector<std::uint8_t> encode_checkpoint(const NetworkSpec& spec, const ParameterVector& params);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                     const ParameterVector& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mpt
