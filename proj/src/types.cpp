#include "rforge/types.hpp"

#include <array>

namespace rforge {

namespace {

constexpr std::array<std::string_view, kNumElements> kElementNames = {
    "C", "N", "O", "S"};

constexpr std::array<std::string_view, kNumAminoAcids> kAminoAcidCodes = {
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
    "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL"};

constexpr std::array<std::string_view, kNumAtomLabels> kAtomLabelNames = {
    "N",   "CA",  "C",   "O",   "OXT", "CB",  "CG",  "CG1", "CG2", "OG",
    "OG1", "SG",  "CD",  "CD1", "CD2", "SD",  "ND1", "ND2", "OD1", "OD2",
    "CE",  "CE1", "CE2", "CE3", "NE",  "NE1", "NE2", "OE1", "OE2", "NZ",
    "CZ",  "CZ2", "CZ3", "NH1", "NH2", "OH",  "CH2"};

constexpr std::array<int, kNumAminoAcids> kChiCounts = {
    /*ALA*/ 0, /*ARG*/ 4, /*ASN*/ 2, /*ASP*/ 2, /*CYS*/ 1,
    /*GLN*/ 3, /*GLU*/ 3, /*GLY*/ 0, /*HIS*/ 2, /*ILE*/ 2,
    /*LEU*/ 2, /*LYS*/ 4, /*MET*/ 3, /*PHE*/ 2, /*PRO*/ 2,
    /*SER*/ 1, /*THR*/ 1, /*TRP*/ 2, /*TYR*/ 2, /*VAL*/ 1};

using L = AtomLabel;

constexpr std::array<L, 5> kAla = {L::N, L::CA, L::C, L::O, L::CB};
constexpr std::array<L, 11> kArg = {L::N,  L::CA, L::C,  L::O,   L::CB,  L::CG,
                                    L::CD, L::NE, L::CZ, L::NH1, L::NH2};
constexpr std::array<L, 8> kAsn = {L::N,  L::CA,  L::C,  L::O,
                                   L::CB, L::CG,  L::OD1, L::ND2};
constexpr std::array<L, 8> kAsp = {L::N,  L::CA,  L::C,  L::O,
                                   L::CB, L::CG,  L::OD1, L::OD2};
constexpr std::array<L, 6> kCys = {L::N, L::CA, L::C, L::O, L::CB, L::SG};
constexpr std::array<L, 9> kGln = {L::N,  L::CA, L::C,   L::O,  L::CB,
                                   L::CG, L::CD, L::OE1, L::NE2};
constexpr std::array<L, 9> kGlu = {L::N,  L::CA, L::C,   L::O,  L::CB,
                                   L::CG, L::CD, L::OE1, L::OE2};
constexpr std::array<L, 4> kGly = {L::N, L::CA, L::C, L::O};
constexpr std::array<L, 10> kHis = {L::N,   L::CA,  L::C,   L::O,  L::CB,
                                    L::CG,  L::ND1, L::CD2, L::CE1, L::NE2};
constexpr std::array<L, 8> kIle = {L::N,   L::CA,  L::C,  L::O,
                                   L::CB,  L::CG1, L::CG2, L::CD1};
constexpr std::array<L, 8> kLeu = {L::N,  L::CA,  L::C,   L::O,
                                   L::CB, L::CG,  L::CD1, L::CD2};
constexpr std::array<L, 9> kLys = {L::N,  L::CA, L::C,  L::O,  L::CB,
                                   L::CG, L::CD, L::CE, L::NZ};
constexpr std::array<L, 8> kMet = {L::N,  L::CA, L::C,  L::O,
                                   L::CB, L::CG, L::SD, L::CE};
constexpr std::array<L, 11> kPhe = {L::N,   L::CA,  L::C,   L::O,   L::CB, L::CG,
                                    L::CD1, L::CD2, L::CE1, L::CE2, L::CZ};
constexpr std::array<L, 7> kPro = {L::N,  L::CA, L::C, L::O,
                                   L::CB, L::CG, L::CD};
constexpr std::array<L, 6> kSer = {L::N, L::CA, L::C, L::O, L::CB, L::OG};
constexpr std::array<L, 7> kThr = {L::N,  L::CA,  L::C, L::O,
                                   L::CB, L::OG1, L::CG2};
constexpr std::array<L, 14> kTrp = {L::N,   L::CA,  L::C,   L::O,   L::CB,
                                    L::CG,  L::CD1, L::CD2, L::NE1, L::CE2,
                                    L::CE3, L::CZ2, L::CZ3, L::CH2};
constexpr std::array<L, 12> kTyr = {L::N,   L::CA,  L::C,   L::O,   L::CB,  L::CG,
                                    L::CD1, L::CD2, L::CE1, L::CE2, L::CZ,  L::OH};
constexpr std::array<L, 7> kVal = {L::N,  L::CA,  L::C, L::O,
                                   L::CB, L::CG1, L::CG2};

constexpr std::array<AminoAcid, 16> kRotamericOrder = {
    AminoAcid::Arg, AminoAcid::Lys, AminoAcid::Met, AminoAcid::Ile,
    AminoAcid::Leu, AminoAcid::Ser, AminoAcid::Thr, AminoAcid::Val,
    AminoAcid::Asn, AminoAcid::Asp, AminoAcid::Gln, AminoAcid::Glu,
    AminoAcid::His, AminoAcid::Trp, AminoAcid::Phe, AminoAcid::Tyr};

} // namespace

std::string_view to_string(Element e) {
  return kElementNames[static_cast<int>(e)];
}

std::string_view to_string(AminoAcid aa) {
  return kAminoAcidCodes[static_cast<int>(aa)];
}

std::string_view to_string(AtomLabel label) {
  return kAtomLabelNames[static_cast<int>(label)];
}

std::optional<Element> element_from_symbol(std::string_view symbol) {
  for (int i = 0; i < kNumElements; ++i)
    if (symbol == kElementNames[i])
      return static_cast<Element>(i);
  return std::nullopt;
}

std::optional<AminoAcid> amino_acid_from_code(std::string_view three_letter) {
  for (int i = 0; i < kNumAminoAcids; ++i)
    if (three_letter == kAminoAcidCodes[i])
      return static_cast<AminoAcid>(i);
  return std::nullopt;
}

std::optional<AtomLabel> atom_label_from_name(std::string_view name) {
  for (int i = 0; i < kNumAtomLabels; ++i)
    if (name == kAtomLabelNames[i])
      return static_cast<AtomLabel>(i);
  return std::nullopt;
}

Element element_of(AtomLabel label) {
  switch (to_string(label).front()) {
  case 'N':
    return Element::N;
  case 'O':
    return Element::O;
  case 'S':
    return Element::S;
  default:
    return Element::C;
  }
}

int chi_count(AminoAcid aa) { return kChiCounts[static_cast<int>(aa)]; }

std::span<const AtomLabel> canonical_atoms(AminoAcid aa) {
  switch (aa) {
  case AminoAcid::Ala: return kAla;
  case AminoAcid::Arg: return kArg;
  case AminoAcid::Asn: return kAsn;
  case AminoAcid::Asp: return kAsp;
  case AminoAcid::Cys: return kCys;
  case AminoAcid::Gln: return kGln;
  case AminoAcid::Glu: return kGlu;
  case AminoAcid::Gly: return kGly;
  case AminoAcid::His: return kHis;
  case AminoAcid::Ile: return kIle;
  case AminoAcid::Leu: return kLeu;
  case AminoAcid::Lys: return kLys;
  case AminoAcid::Met: return kMet;
  case AminoAcid::Phe: return kPhe;
  case AminoAcid::Pro: return kPro;
  case AminoAcid::Ser: return kSer;
  case AminoAcid::Thr: return kThr;
  case AminoAcid::Trp: return kTrp;
  case AminoAcid::Tyr: return kTyr;
  case AminoAcid::Val: return kVal;
  }
  return {};
}

bool is_sidechain_label(AtomLabel label) {
  switch (label) {
  case AtomLabel::N:
  case AtomLabel::CA:
  case AtomLabel::C:
  case AtomLabel::O:
  case AtomLabel::OXT:
    return false;
  default:
    return true;
  }
}

bool is_rotameric_for_prediction(AminoAcid aa) {
  return chi_count(aa) > 0 && aa != AminoAcid::Pro && aa != AminoAcid::Cys;
}

std::span<const AminoAcid> rotameric_amino_acids() { return kRotamericOrder; }

} // namespace rforge
