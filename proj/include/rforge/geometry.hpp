#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rforge/chi_table.hpp"
#include "rforge/rng.hpp"
#include "rforge/structure.hpp"
#include "rforge/types.hpp"

namespace rforge {

// Signed torsion about the p1-p2 axis, degrees in [-180, 180).
// Throws GeometryError on degenerate input (coincident or collinear points).
double dihedral(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);

// Proper rotation (orthonormal, det +1).
class Rotation {
public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d& m);

  static Rotation identity() { return Rotation(); }
  // Axis-angle (Rodrigues); axis need not be normalized.
  static Rotation about_axis(const Vec3& axis, double angle_rad);
  // Uniform over SO(3) via uniform unit quaternions.
  static Rotation random(Rng& rng);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Vec3 apply(const Vec3& v) const { return m_ * v; }

private:
  explicit Rotation(Eigen::Matrix3d&& m, bool /*unchecked*/) : m_(std::move(m)) {}
  Eigen::Matrix3d m_;
};

struct BackboneTorsions {
  std::optional<double> phi;
  std::optional<double> psi;
};

// phi_i = dihedral(C_{i-1}, N_i, CA_i, C_i); psi_i = dihedral(N_i, CA_i, C_i,
// N_{i+1}). Undefined at chain termini, across missing backbone atoms, and
// across broken peptide bonds (C-N distance > 2.5 A).
std::vector<BackboneTorsions> backbone_torsions(const Chain& chain);

// Chi values per the table quadruples, in order. Throws
// IncompleteResidueError when a quadruple atom is missing.
std::vector<double> extract_chi(const ResidueRecord& residue,
                                const ChiDefinitionTable& table);

// Rotates the atoms downstream of each chi bond so the measured chi values
// equal the requested ones. Backbone atoms, bond lengths and bond angles are
// unchanged. Throws on chi-count mismatch or incomplete residue.
ResidueRecord apply_chi(const ResidueRecord& residue,
                        std::span<const double> chi_deg,
                        const ChiDefinitionTable& table);
void apply_chi_inplace(ResidueRecord& residue, std::span<const double> chi_deg,
                       const ChiDefinitionTable& table);

// Fills phi/psi/chi fields and the completeness flag for every residue.
void annotate_structure(Structure& s, const ChiDefinitionTable& table);

} // namespace rforge
