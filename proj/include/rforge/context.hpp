#pragma once

#include <span>
#include <vector>

#include "rforge/structure.hpp"
#include "rforge/types.hpp"

namespace rforge {

inline constexpr int kDefaultContextSize = 64;

struct ContextAtom {
  Element element;
  AtomLabel label;
  AminoAcid amino_acid;
  Vec3 coords;
  bool is_rotamer_atom; // side-chain atom of the center residue
};

// The k atoms nearest the center residue's beta carbon (alpha carbon for
// glycine), center residue included.
struct AtomContext {
  std::vector<ContextAtom> atoms;
  char chain_id;
  int residue_index;
  AminoAcid amino_acid;

  int rotamer_atom_count() const {
    int n = 0;
    for (const auto& a : atoms)
      n += a.is_rotamer_atom;
    return n;
  }
};

// Throws ContextTooSmallError when the structure has fewer than k atoms.
// Ties in distance break by (chain, residue_index, atom label) order, so the
// result does not depend on input atom ordering.
AtomContext knn_context(const Structure& s, const ResidueRecord& center,
                        int k = kDefaultContextSize);

// Same, with the center residue's side-chain atoms replaced by a rebuilt
// variant before neighbor selection.
AtomContext knn_context(const Structure& s, const ResidueRecord& center,
                        const ResidueRecord& replacement, int k);

} // namespace rforge
