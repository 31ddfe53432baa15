#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "issuemask/encoder.hpp"

namespace issuemask {

inline constexpr std::string_view kCheckpointFormat = "issuemask-checkpoint/1";

/// Binary tensor file: magic "IMW1", tensor count, then per tensor the name,
/// rows, cols and float32 values (little-endian).
void write_tensors(const std::filesystem::path& path, const ParamStore<float>& params);

/// Fills `params` in place. Names, order, and shapes must match exactly.
void read_tensors(const std::filesystem::path& path, ParamStore<float>& params);

/// Parses <dir>/manifest.json, checks format and kind, and verifies the
/// vocab.txt and weights.bin digests it records.
nlohmann::json read_checkpoint_manifest(const std::filesystem::path& dir, std::string_view kind);

}  // namespace issuemask
