#pragma once

#include <cstdint>
#include <string>

#include "sparsewalk/learn/policy.hpp"

namespace sparsewalk::learn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary container:
///   "SWCK" | u32 version | u64 length + config text | u32 tensor count |
///   per tensor: u32 length + name, u32 rank, u64 dims[rank], f64 data (row-major)
/// All integers and floats little-endian.
struct Checkpoint {
  std::string config_text;
  PolicyParams params;
};

std::string encode_checkpoint(const PolicyParams& params, const std::string& config_text);

/// Throws std::runtime_error on malformed data and ShapeMismatchError when a tensor
/// disagrees with `layout`.
Checkpoint decode_checkpoint(const std::string& bytes, const PolicyLayout& layout);

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const std::string& config_text);
Checkpoint load_checkpoint(const std::string& path, const PolicyLayout& layout);

/// Reads only the config text, e.g. to recover the layout before a full load.
std::string read_checkpoint_config(const std::string& path);

}  // namespace sparsewalk::learn
