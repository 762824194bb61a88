#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rforge/types.hpp"

namespace rforge {

struct AtomRecord {
  Element element;
  AtomLabel label;
  AminoAcid amino_acid;
  int residue_index;
  char chain_id;
  Vec3 coords;
};

struct ResidueRecord {
  AminoAcid amino_acid;
  int residue_index;
  char chain_id;
  // Canonical order: backbone N, CA, C, O, side chain in kinematic order,
  // then OXT if present.
  std::vector<AtomRecord> atoms;
  std::optional<double> phi;       // degrees in [-180, 180)
  std::optional<double> psi;       // degrees in [-180, 180)
  std::vector<double> chi;         // canonical count, empty if incomplete
  bool complete = false;           // all canonical heavy atoms present

  const AtomRecord* find(AtomLabel label) const {
    for (const auto& a : atoms)
      if (a.label == label)
        return &a;
    return nullptr;
  }
  AtomRecord* find(AtomLabel label) {
    for (auto& a : atoms)
      if (a.label == label)
        return &a;
    return nullptr;
  }

  // Context-centering anchor: CB, or CA for glycine.
  const AtomRecord* anchor_atom() const {
    if (const AtomRecord* cb = find(AtomLabel::CB))
      return cb;
    return find(AtomLabel::CA);
  }
};

struct Chain {
  char id;
  std::vector<ResidueRecord> residues;
};

struct ParseStats {
  int hydrogens_dropped = 0;
  int hetatm_dropped = 0;
  int atoms_dropped = 0;    // unknown labels, altloc losers, bad residues
  int residues_dropped = 0; // non-canonical or out-of-order residues
};

struct Structure {
  std::string id;
  std::optional<double> resolution; // Angstrom
  std::optional<double> r_value;
  std::vector<Chain> chains;
  ParseStats stats;

  std::size_t atom_count() const {
    std::size_t n = 0;
    for (const auto& c : chains)
      for (const auto& r : c.residues)
        n += r.atoms.size();
    return n;
  }

  std::size_t residue_count() const {
    std::size_t n = 0;
    for (const auto& c : chains)
      n += c.residues.size();
    return n;
  }
};

// Internal record format (text, lossless round trip).
std::string serialize_structure(const Structure& s);
Structure deserialize_structure(const std::string& text);

bool operator==(const AtomRecord& a, const AtomRecord& b);
bool operator==(const ResidueRecord& a, const ResidueRecord& b);
bool operator==(const Chain& a, const Chain& b);
bool operator==(const Structure& a, const Structure& b);

} // namespace rforge
