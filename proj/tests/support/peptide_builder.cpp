#include "support/peptide_builder.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "rforge/angles.hpp"

namespace rforge::testsupport {

namespace {

using L = AtomLabel;

struct TemplateAtom {
  L label;
  L parent, gp, ggp;
  double bond;
  double angle; // gp-parent-label, degrees
  int chi;      // 1-based chi index, 0 for fixed torsion
  double offset; // torsion offset (or the fixed torsion when chi == 0)
};

// Side-chain templates in kinematic order. Torsion = chi[k] + offset when
// chi > 0, else the fixed offset. Ideal bond lengths and angles; aromatic
// rings are built branch-wise and do not close exactly, which is irrelevant
// for the self-consistency checks these fixtures serve.
const std::map<AminoAcid, std::vector<TemplateAtom>> kSideChains = {
    {AminoAcid::Ala, {}},
    {AminoAcid::Gly, {}},
    {AminoAcid::Ser, {{L::OG, L::CB, L::CA, L::N, 1.417, 110.8, 1, 0}}},
    {AminoAcid::Cys, {{L::SG, L::CB, L::CA, L::N, 1.808, 113.8, 1, 0}}},
    {AminoAcid::Thr,
     {{L::OG1, L::CB, L::CA, L::N, 1.433, 109.6, 1, 0},
      {L::CG2, L::CB, L::CA, L::N, 1.521, 110.5, 1, -120}}},
    {AminoAcid::Val,
     {{L::CG1, L::CB, L::CA, L::N, 1.527, 110.5, 1, 0},
      {L::CG2, L::CB, L::CA, L::N, 1.527, 110.5, 1, 120}}},
    {AminoAcid::Ile,
     {{L::CG1, L::CB, L::CA, L::N, 1.530, 110.4, 1, 0},
      {L::CG2, L::CB, L::CA, L::N, 1.521, 110.5, 1, -120},
      {L::CD1, L::CG1, L::CB, L::CA, 1.513, 113.9, 2, 0}}},
    {AminoAcid::Leu,
     {{L::CG, L::CB, L::CA, L::N, 1.530, 116.3, 1, 0},
      {L::CD1, L::CG, L::CB, L::CA, 1.521, 110.7, 2, 0},
      {L::CD2, L::CG, L::CB, L::CA, 1.521, 110.7, 2, 120}}},
    {AminoAcid::Asp,
     {{L::CG, L::CB, L::CA, L::N, 1.516, 112.6, 1, 0},
      {L::OD1, L::CG, L::CB, L::CA, 1.249, 118.4, 2, 0},
      {L::OD2, L::CG, L::CB, L::CA, 1.249, 118.4, 2, 180}}},
    {AminoAcid::Asn,
     {{L::CG, L::CB, L::CA, L::N, 1.516, 112.6, 1, 0},
      {L::OD1, L::CG, L::CB, L::CA, 1.231, 120.8, 2, 0},
      {L::ND2, L::CG, L::CB, L::CA, 1.328, 116.4, 2, 180}}},
    {AminoAcid::Glu,
     {{L::CG, L::CB, L::CA, L::N, 1.530, 114.1, 1, 0},
      {L::CD, L::CG, L::CB, L::CA, 1.516, 112.6, 2, 0},
      {L::OE1, L::CD, L::CG, L::CB, 1.249, 118.4, 3, 0},
      {L::OE2, L::CD, L::CG, L::CB, 1.249, 118.4, 3, 180}}},
    {AminoAcid::Gln,
     {{L::CG, L::CB, L::CA, L::N, 1.530, 114.1, 1, 0},
      {L::CD, L::CG, L::CB, L::CA, 1.516, 112.6, 2, 0},
      {L::OE1, L::CD, L::CG, L::CB, 1.231, 120.8, 3, 0},
      {L::NE2, L::CD, L::CG, L::CB, 1.328, 116.4, 3, 180}}},
    {AminoAcid::Met,
     {{L::CG, L::CB, L::CA, L::N, 1.530, 114.1, 1, 0},
      {L::SD, L::CG, L::CB, L::CA, 1.803, 112.7, 2, 0},
      {L::CE, L::SD, L::CG, L::CB, 1.791, 100.9, 3, 0}}},
    {AminoAcid::Lys,
     {{L::CG, L::CB, L::CA, L::N, 1.530, 114.1, 1, 0},
      {L::CD, L::CG, L::CB, L::CA, 1.520, 111.3, 2, 0},
      {L::CE, L::CD, L::CG, L::CB, 1.508, 111.3, 3, 0},
      {L::NZ, L::CE, L::CD, L::CG, 1.489, 111.9, 4, 0}}},
    {AminoAcid::Arg,
     {{L::CG, L::CB, L::CA, L::N, 1.530, 114.1, 1, 0},
      {L::CD, L::CG, L::CB, L::CA, 1.520, 111.3, 2, 0},
      {L::NE, L::CD, L::CG, L::CB, 1.461, 112.0, 3, 0},
      {L::CZ, L::NE, L::CD, L::CG, 1.329, 124.2, 4, 0},
      {L::NH1, L::CZ, L::NE, L::CD, 1.326, 120.0, 0, 0},
      {L::NH2, L::CZ, L::NE, L::CD, 1.326, 120.0, 0, 180}}},
    {AminoAcid::His,
     {{L::CG, L::CB, L::CA, L::N, 1.497, 113.8, 1, 0},
      {L::ND1, L::CG, L::CB, L::CA, 1.378, 122.7, 2, 0},
      {L::CD2, L::CG, L::CB, L::CA, 1.354, 131.0, 2, 180},
      {L::CE1, L::ND1, L::CG, L::CB, 1.321, 109.3, 0, 180},
      {L::NE2, L::CD2, L::CG, L::CB, 1.374, 107.2, 0, 180}}},
    {AminoAcid::Phe,
     {{L::CG, L::CB, L::CA, L::N, 1.502, 113.8, 1, 0},
      {L::CD1, L::CG, L::CB, L::CA, 1.384, 120.7, 2, 0},
      {L::CD2, L::CG, L::CB, L::CA, 1.384, 120.7, 2, 180},
      {L::CE1, L::CD1, L::CG, L::CB, 1.382, 120.7, 0, 180},
      {L::CE2, L::CD2, L::CG, L::CB, 1.382, 120.7, 0, 180},
      {L::CZ, L::CE1, L::CD1, L::CG, 1.372, 120.0, 0, 0}}},
    {AminoAcid::Tyr,
     {{L::CG, L::CB, L::CA, L::N, 1.502, 113.8, 1, 0},
      {L::CD1, L::CG, L::CB, L::CA, 1.384, 120.7, 2, 0},
      {L::CD2, L::CG, L::CB, L::CA, 1.384, 120.7, 2, 180},
      {L::CE1, L::CD1, L::CG, L::CB, 1.382, 120.7, 0, 180},
      {L::CE2, L::CD2, L::CG, L::CB, 1.382, 120.7, 0, 180},
      {L::CZ, L::CE1, L::CD1, L::CG, 1.372, 120.0, 0, 0},
      {L::OH, L::CZ, L::CE1, L::CD1, 1.376, 119.9, 0, 180}}},
    {AminoAcid::Trp,
     {{L::CG, L::CB, L::CA, L::N, 1.498, 113.6, 1, 0},
      {L::CD1, L::CG, L::CB, L::CA, 1.365, 126.9, 2, 0},
      {L::CD2, L::CG, L::CB, L::CA, 1.433, 126.7, 2, 180},
      {L::NE1, L::CD1, L::CG, L::CB, 1.374, 110.2, 0, 180},
      {L::CE2, L::CD2, L::CG, L::CB, 1.409, 107.2, 0, 0},
      {L::CE3, L::CD2, L::CG, L::CB, 1.398, 133.9, 0, 180},
      {L::CZ2, L::CE2, L::CD2, L::CG, 1.394, 122.4, 0, 180},
      {L::CZ3, L::CE3, L::CD2, L::CG, 1.382, 118.6, 0, 180},
      {L::CH2, L::CZ2, L::CE2, L::CD2, 1.368, 117.5, 0, 0}}},
};

constexpr double kBondNCa = 1.458;
constexpr double kBondCaC = 1.525;
constexpr double kBondCN = 1.329;
constexpr double kBondCO = 1.231;
constexpr double kAngleNCaC = 111.2;
constexpr double kAngleCaCN = 116.2;
constexpr double kAngleCNCa = 121.7;
constexpr double kAngleCaCO = 120.5;
constexpr double kAngleNCaCb = 110.4;
constexpr double kTorsionCb = -122.8; // dihedral(C, N, CA, CB)
constexpr double kOmega = 180.0;

} // namespace

Vec3 nerf_place(const Vec3& a, const Vec3& b, const Vec3& c, double bond,
                double angle_deg, double torsion_deg) {
  const double theta = deg_to_rad(angle_deg);
  const double tau = deg_to_rad(torsion_deg);
  const Vec3 bc = (c - b).normalized();
  const Vec3 n = (b - a).cross(bc).normalized();
  const Vec3 m = n.cross(bc);
  const Vec3 d(-bond * std::cos(theta), bond * std::sin(theta) * std::cos(tau),
               bond * std::sin(theta) * std::sin(tau));
  return c + d.x() * bc + d.y() * m + d.z() * n;
}

Chain build_chain(const ChainSpec& spec) {
  Chain chain{spec.chain_id, {}};
  Vec3 prev_n, prev_ca, prev_c;
  for (std::size_t i = 0; i < spec.residues.size(); ++i) {
    const ResidueSpec& rs = spec.residues[i];
    auto tmpl = kSideChains.find(rs.aa);
    if (tmpl == kSideChains.end())
      throw std::invalid_argument("peptide builder does not support " +
                                  std::string(to_string(rs.aa)));
    if (rs.chi.size() != static_cast<std::size_t>(chi_count(rs.aa)))
      throw std::invalid_argument("chi count mismatch in ResidueSpec");

    ResidueRecord r;
    r.amino_acid = rs.aa;
    r.residue_index = spec.first_index + static_cast<int>(i);
    r.chain_id = spec.chain_id;

    Vec3 n, ca, c;
    if (i == 0) {
      n = Vec3(0, 0, 0);
      ca = Vec3(kBondNCa, 0, 0);
      const double t = deg_to_rad(180.0 - kAngleNCaC);
      c = ca + kBondCaC * Vec3(std::cos(t), std::sin(t), 0);
    } else {
      const double psi_prev = spec.residues[i - 1].psi;
      n = nerf_place(prev_n, prev_ca, prev_c, kBondCN, kAngleCaCN, psi_prev);
      ca = nerf_place(prev_ca, prev_c, n, kBondNCa, kAngleCNCa, kOmega);
      c = nerf_place(prev_c, n, ca, kBondCaC, kAngleNCaC, rs.phi);
    }
    const Vec3 o = nerf_place(n, ca, c, kBondCO, kAngleCaCO, rs.psi + 180.0);

    auto add = [&](L label, const Vec3& pos) {
      r.atoms.push_back({element_of(label), label, rs.aa, r.residue_index,
                         spec.chain_id, pos});
    };
    add(L::N, n);
    add(L::CA, ca);
    add(L::C, c);
    add(L::O, o);
    if (rs.aa != AminoAcid::Gly)
      add(L::CB, nerf_place(c, n, ca, 1.521, kAngleNCaCb, kTorsionCb));

    for (const TemplateAtom& t : tmpl->second) {
      auto pos_of = [&](L label) {
        const AtomRecord* a = r.find(label);
        if (!a)
          throw std::logic_error("template parent not yet placed");
        return a->coords;
      };
      const double torsion =
          t.chi > 0 ? rs.chi[t.chi - 1] + t.offset : t.offset;
      add(t.label, nerf_place(pos_of(t.ggp), pos_of(t.gp), pos_of(t.parent),
                              t.bond, t.angle, torsion));
    }
    chain.residues.push_back(std::move(r));
    prev_n = n;
    prev_ca = ca;
    prev_c = c;
  }
  return chain;
}

Structure build_structure(const std::vector<ChainSpec>& chains,
                          const std::string& id, double resolution,
                          double r_value) {
  Structure s;
  s.id = id;
  s.resolution = resolution;
  s.r_value = r_value;
  for (const auto& cs : chains)
    s.chains.push_back(build_chain(cs));
  annotate_structure(s, ChiDefinitionTable::standard());
  return s;
}

void transform_chain(Chain& chain, const Rotation& rot, const Vec3& shift) {
  for (auto& r : chain.residues)
    for (auto& a : r.atoms)
      a.coords = rot.apply(a.coords) + shift;
}

std::vector<std::pair<AtomLabel, AtomLabel>> residue_bonds(AminoAcid aa) {
  std::vector<std::pair<AtomLabel, AtomLabel>> bonds = {
      {L::N, L::CA}, {L::CA, L::C}, {L::C, L::O}};
  if (aa != AminoAcid::Gly)
    bonds.emplace_back(L::CA, L::CB);
  for (const TemplateAtom& t : kSideChains.at(aa))
    bonds.emplace_back(t.parent, t.label);
  return bonds;
}

std::string to_pdb_text(const Structure& s) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "HEADER    SYNTHETIC PEPTIDE                       01-JAN-20   %-4s\n",
                s.id.c_str());
  out += buf;
  if (s.resolution) {
    std::snprintf(buf, sizeof(buf),
                  "REMARK   2 RESOLUTION.    %.2f ANGSTROMS.\n", *s.resolution);
    out += buf;
  }
  if (s.r_value) {
    std::snprintf(buf, sizeof(buf),
                  "REMARK   3   R VALUE            (WORKING SET) : %.3f\n",
                  *s.r_value);
    out += buf;
  }
  int serial = 1;
  for (const Chain& chain : s.chains) {
    for (const ResidueRecord& r : chain.residues) {
      for (const AtomRecord& a : r.atoms) {
        const std::string name(to_string(a.label));
        // Columns: name is left-padded to start at column 14 for short names.
        std::string padded = name.size() < 4 ? " " + name : name;
        padded.resize(4, ' ');
        std::snprintf(buf, sizeof(buf),
                      "ATOM  %5d %s %3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f"
                      "          %2s\n",
                      serial++, padded.c_str(),
                      std::string(to_string(a.amino_acid)).c_str(), chain.id,
                      a.residue_index, a.coords.x(), a.coords.y(),
                      a.coords.z(), 1.0, 20.0,
                      std::string(to_string(a.element)).c_str());
        out += buf;
      }
    }
    out += "TER\n";
  }
  out += "END\n";
  return out;
}

} // namespace rforge::testsupport
