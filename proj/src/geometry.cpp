#include "rforge/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "rforge/angles.hpp"
#include "rforge/error.hpp"

namespace rforge {

namespace {
constexpr double kDegenerateTol = 1e-12;
// Peptide C-N bonds are ~1.33 A; anything beyond this is a chain break.
constexpr double kPeptideBondMax = 2.5;
} // namespace

double dihedral(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                const Vec3& p3) {
  const Vec3 b1 = p1 - p0;
  const Vec3 b2 = p2 - p1;
  const Vec3 b3 = p3 - p2;
  if (b2.squaredNorm() < kDegenerateTol)
    throw GeometryError("dihedral: axis points coincide");
  const Vec3 n1 = b1.cross(b2);
  const Vec3 n2 = b2.cross(b3);
  if (n1.squaredNorm() < kDegenerateTol || n2.squaredNorm() < kDegenerateTol)
    throw GeometryError("dihedral: collinear points");
  const double x = n1.dot(n2);
  const double y = n1.cross(n2).dot(b2.normalized());
  return wrap_deg(rad_to_deg(std::atan2(y, x)));
}

Rotation::Rotation(const Eigen::Matrix3d& m) : m_(m) {
  if ((m_ * m_.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-9 ||
      std::abs(m_.determinant() - 1.0) > 1e-9)
    throw GeometryError("matrix is not a proper rotation");
}

Rotation Rotation::about_axis(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (n < kDegenerateTol)
    throw GeometryError("rotation axis has zero length");
  Rotation r;
  r.m_ = Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix();
  return r;
}

Rotation Rotation::random(Rng& rng) {
  // Shoemake's uniform unit quaternion.
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(a * std::sin(2 * kPi * u2),
                             a * std::cos(2 * kPi * u2),
                             b * std::sin(2 * kPi * u3),
                             b * std::cos(2 * kPi * u3));
  Rotation r;
  r.m_ = q.toRotationMatrix();
  return r;
}

std::vector<BackboneTorsions> backbone_torsions(const Chain& chain) {
  const std::size_t n = chain.residues.size();
  std::vector<BackboneTorsions> out(n);
  auto atom = [&](std::size_t i, AtomLabel l) {
    return chain.residues[i].find(l);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const AtomRecord* ni = atom(i, AtomLabel::N);
    const AtomRecord* cai = atom(i, AtomLabel::CA);
    const AtomRecord* ci = atom(i, AtomLabel::C);
    if (!ni || !cai || !ci)
      continue;
    if (i > 0) {
      if (const AtomRecord* cprev = atom(i - 1, AtomLabel::C)) {
        if ((cprev->coords - ni->coords).norm() <= kPeptideBondMax) {
          try {
            out[i].phi = dihedral(cprev->coords, ni->coords, cai->coords,
                                  ci->coords);
          } catch (const GeometryError&) {
          }
        }
      }
    }
    if (i + 1 < n) {
      if (const AtomRecord* nnext = atom(i + 1, AtomLabel::N)) {
        if ((ci->coords - nnext->coords).norm() <= kPeptideBondMax) {
          try {
            out[i].psi = dihedral(ni->coords, cai->coords, ci->coords,
                                  nnext->coords);
          } catch (const GeometryError&) {
          }
        }
      }
    }
  }
  return out;
}

std::vector<double> extract_chi(const ResidueRecord& residue,
                                const ChiDefinitionTable& table) {
  std::vector<double> chi;
  for (const ChiDef& def : table.chi_defs(residue.amino_acid)) {
    const AtomRecord* a[4];
    for (int i = 0; i < 4; ++i) {
      a[i] = residue.find(def.quad[i]);
      if (!a[i])
        throw IncompleteResidueError(
            std::string(to_string(residue.amino_acid)) + " " +
            std::to_string(residue.residue_index) + " missing atom " +
            std::string(to_string(def.quad[i])));
    }
    chi.push_back(
        dihedral(a[0]->coords, a[1]->coords, a[2]->coords, a[3]->coords));
  }
  return chi;
}

void apply_chi_inplace(ResidueRecord& residue, std::span<const double> chi_deg,
                       const ChiDefinitionTable& table) {
  auto defs = table.chi_defs(residue.amino_acid);
  if (chi_deg.size() != defs.size())
    throw std::invalid_argument(
        "apply_chi: got " + std::to_string(chi_deg.size()) + " chi values, " +
        std::string(to_string(residue.amino_acid)) + " has " +
        std::to_string(defs.size()));
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const ChiDef& def = defs[i];
    const AtomRecord* a[4];
    for (int j = 0; j < 4; ++j) {
      a[j] = residue.find(def.quad[j]);
      if (!a[j])
        throw IncompleteResidueError(
            std::string(to_string(residue.amino_acid)) + " " +
            std::to_string(residue.residue_index) + " missing atom " +
            std::string(to_string(def.quad[j])));
    }
    const double current =
        dihedral(a[0]->coords, a[1]->coords, a[2]->coords, a[3]->coords);
    const double delta = deg_to_rad(wrap_deg(chi_deg[i] - current));
    if (delta == 0.0)
      continue;
    const Vec3 pivot = a[1]->coords;
    const Rotation rot = Rotation::about_axis(a[2]->coords - pivot, delta);
    for (AtomLabel moved : def.downstream) {
      AtomRecord* m = residue.find(moved);
      if (!m)
        throw IncompleteResidueError(
            std::string(to_string(residue.amino_acid)) + " " +
            std::to_string(residue.residue_index) + " missing atom " +
            std::string(to_string(moved)));
      m->coords = pivot + rot.apply(m->coords - pivot);
    }
  }
}

ResidueRecord apply_chi(const ResidueRecord& residue,
                        std::span<const double> chi_deg,
                        const ChiDefinitionTable& table) {
  ResidueRecord out = residue;
  apply_chi_inplace(out, chi_deg, table);
  out.chi.assign(chi_deg.begin(), chi_deg.end());
  for (auto& v : out.chi)
    v = wrap_deg(v);
  return out;
}

void annotate_structure(Structure& s, const ChiDefinitionTable& table) {
  for (Chain& chain : s.chains) {
    auto torsions = backbone_torsions(chain);
    for (std::size_t i = 0; i < chain.residues.size(); ++i) {
      ResidueRecord& r = chain.residues[i];
      r.phi = torsions[i].phi;
      r.psi = torsions[i].psi;
      r.complete = true;
      for (AtomLabel l : canonical_atoms(r.amino_acid)) {
        if (!r.find(l)) {
          r.complete = false;
          break;
        }
      }
      r.chi.clear();
      if (r.complete && rforge::chi_count(r.amino_acid) > 0) {
        try {
          r.chi = extract_chi(r, table);
        } catch (const Error&) {
          r.complete = false;
        }
      }
    }
  }
}

} // namespace rforge
