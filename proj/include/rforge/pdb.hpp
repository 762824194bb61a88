#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rforge/structure.hpp"

namespace rforge {

// Parses PDB-format text (ATOM/HETATM records plus header metadata) into a
// typed Structure. Hydrogens are dropped, MSE is remapped to MET (Se -> S),
// alternate locations resolve to the highest-occupancy copy, and only the
// first model of multi-model files is read. Throws ParseError on empty input
// or malformed records.
Structure parse_pdb(std::string_view text, std::string_view fallback_id = "");

Structure parse_pdb_file(const std::filesystem::path& path);

} // namespace rforge
