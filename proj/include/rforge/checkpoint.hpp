#pragma once

#include <filesystem>
#include <memory>

#include "rforge/model.hpp"

namespace rforge {

// Checkpoint container, format version 1:
//   bytes 0-7   magic "RFGCKPT1"
//   bytes 8-11  little-endian u32 header length H
//   bytes 12..  JSON header: {"format", "architecture", "config",
//               "tensors": [{"name", "rows", "cols"}, ...]}
//   then each tensor's rows*cols doubles, column-major, little-endian,
//   in header order.
// Writes are atomic (temp file + rename).
void save_checkpoint(EnergyModel& model, const std::filesystem::path& path);

std::unique_ptr<EnergyModel> load_checkpoint(const std::filesystem::path& path);

// Header summary without tensor data (for inspect-checkpoint).
std::string describe_checkpoint(const std::filesystem::path& path);

} // namespace rforge
