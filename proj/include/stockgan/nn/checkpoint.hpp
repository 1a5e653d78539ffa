#pragma once

#include "stockgan/nn/params.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace stockgan::nn {

// Checkpoint container, version 1:
//
//   offset 0   8 bytes   magic "SGANCKPT"
//   offset 8   u32 LE    format version
//   offset 12  u64 LE    header length n
//   offset 20  n bytes   UTF-8 JSON header:
//                          {"metadata": {...},
//                           "tensors": [{"name", "rows", "cols", "offset"}, ...]}
//   offset 20+n          tensor payload, IEEE-754 binary64 little-endian,
//                        row-major, tensors in header order; "offset" is the
//                        byte offset of each tensor within the payload.
//
// The JSON header is serialized with sorted keys so equal inputs give equal bytes.
inline constexpr char kCheckpointMagic[8] = {'S', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    nlohmann::json metadata;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace stockgan::nn
