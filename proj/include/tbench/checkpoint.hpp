#pragma once

#include <filesystem>

#include "tbench/model.hpp"

namespace tbench {

/// Versioned binary checkpoint: magic bytes, format version, architecture
/// fields + hash, then per layer (name, shapes, little-endian 64-bit reals).
/// A human-readable JSON sidecar is written next to it as `<path>.json`.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);

/// Verifies magic/version and that the stored arch hash matches the stored
/// fields before accepting any tensor data.
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace tbench
