#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rforge/types.hpp"

namespace rforge {

struct ChiDef {
  std::array<AtomLabel, 4> quad; // dihedral atoms, in order
  std::vector<AtomLabel> downstream; // atoms moved by rotating the a1-a2 bond
};

// Per-amino-acid chi dihedral definitions with the atoms downstream of each
// rotatable bond. Ships as data/chi_definitions.txt; an identical copy is
// embedded so the table works without file access.
class ChiDefinitionTable {
public:
  static const ChiDefinitionTable& standard();
  static ChiDefinitionTable parse(std::string_view text);
  static ChiDefinitionTable load(const std::filesystem::path& path);

  std::span<const ChiDef> chi_defs(AminoAcid aa) const {
    return defs_[static_cast<int>(aa)];
  }
  int chi_count(AminoAcid aa) const {
    return static_cast<int>(defs_[static_cast<int>(aa)].size());
  }

private:
  std::array<std::vector<ChiDef>, kNumAminoAcids> defs_;
};

} // namespace rforge
