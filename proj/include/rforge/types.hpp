#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace rforge {

using Vec3 = Eigen::Vector3d;

// Element vocabulary after parsing. Hydrogens are dropped at parse time and
// selenium (MSE) is remapped to sulfur, so nothing else can appear.
enum class Element : std::uint8_t { C = 0, N, O, S };
inline constexpr int kNumElements = 4;

enum class AminoAcid : std::uint8_t {
  Ala = 0, Arg, Asn, Asp, Cys, Gln, Glu, Gly, His, Ile,
  Leu, Lys, Met, Phe, Pro, Ser, Thr, Trp, Tyr, Val,
};
inline constexpr int kNumAminoAcids = 20;

// Heavy-atom name vocabulary, shared across amino-acid types. One entry per
// canonical PDB heavy-atom name.
enum class AtomLabel : std::uint8_t {
  N = 0, CA, C, O, OXT,
  CB, CG, CG1, CG2, OG, OG1, SG,
  CD, CD1, CD2, SD, ND1, ND2, OD1, OD2,
  CE, CE1, CE2, CE3, NE, NE1, NE2, OE1, OE2, NZ,
  CZ, CZ2, CZ3, NH1, NH2, OH, CH2,
};
inline constexpr int kNumAtomLabels = 37;

std::string_view to_string(Element e);
std::string_view to_string(AminoAcid aa);
std::string_view to_string(AtomLabel label);

std::optional<Element> element_from_symbol(std::string_view symbol);
std::optional<AminoAcid> amino_acid_from_code(std::string_view three_letter);
std::optional<AtomLabel> atom_label_from_name(std::string_view name);

// Element implied by a canonical atom label (first character of the name).
Element element_of(AtomLabel label);

// Number of chi dihedrals for the amino-acid type (0 for Ala/Gly, up to 4).
int chi_count(AminoAcid aa);

// Canonical heavy atoms of the residue type, backbone first, side chain in
// kinematic order. OXT is optional and not listed.
std::span<const AtomLabel> canonical_atoms(AminoAcid aa);

// Side-chain atoms are everything outside {N, CA, C, O, OXT}; CB included.
bool is_sidechain_label(AtomLabel label);

// Rotamer prediction covers the 16 types with chi angles minus Pro and Cys;
// the excluded types still contribute context atoms.
bool is_rotameric_for_prediction(AminoAcid aa);

// The benchmark's 16 amino acids in report order.
std::span<const AminoAcid> rotameric_amino_acids();

} // namespace rforge
