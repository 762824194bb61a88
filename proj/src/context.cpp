#include "rforge/context.hpp"

#include <algorithm>
#include <tuple>

#include "rforge/error.hpp"

namespace rforge {

namespace {

struct Entry {
  double dist2;
  char chain_id;
  int residue_index;
  int label_order;
  const AtomRecord* atom;
  bool is_rotamer_atom;
};

AtomContext build_context(const Structure& s, const ResidueRecord& center,
                          const ResidueRecord* replacement, int k) {
  if (k < 1)
    throw std::invalid_argument("knn_context: k must be >= 1");
  const ResidueRecord& effective = replacement ? *replacement : center;
  const AtomRecord* anchor = effective.anchor_atom();
  if (!anchor)
    throw IncompleteResidueError("residue " +
                                 std::to_string(center.residue_index) +
                                 " has no beta/alpha carbon anchor");
  const Vec3 origin = anchor->coords;

  std::vector<Entry> entries;
  entries.reserve(s.atom_count());
  auto push = [&](const AtomRecord& a, bool rotamer) {
    entries.push_back({(a.coords - origin).squaredNorm(), a.chain_id,
                       a.residue_index, static_cast<int>(a.label), &a,
                       rotamer});
  };
  for (const Chain& chain : s.chains) {
    for (const ResidueRecord& r : chain.residues) {
      const bool is_center = chain.id == center.chain_id &&
                             r.residue_index == center.residue_index;
      if (is_center) {
        for (const AtomRecord& a : effective.atoms)
          push(a, is_sidechain_label(a.label));
      } else {
        for (const AtomRecord& a : r.atoms)
          push(a, false);
      }
    }
  }
  if (entries.size() < static_cast<std::size_t>(k))
    throw ContextTooSmallError("structure has " +
                               std::to_string(entries.size()) +
                               " atoms, need " + std::to_string(k));

  auto key = [](const Entry& e) {
    return std::make_tuple(e.dist2, e.chain_id, e.residue_index,
                           e.label_order);
  };
  std::nth_element(entries.begin(), entries.begin() + k - 1, entries.end(),
                   [&](const Entry& a, const Entry& b) { return key(a) < key(b); });
  std::sort(entries.begin(), entries.begin() + k,
            [&](const Entry& a, const Entry& b) { return key(a) < key(b); });

  AtomContext ctx;
  ctx.chain_id = center.chain_id;
  ctx.residue_index = center.residue_index;
  ctx.amino_acid = center.amino_acid;
  ctx.atoms.reserve(k);
  for (int i = 0; i < k; ++i) {
    const Entry& e = entries[i];
    ctx.atoms.push_back({e.atom->element, e.atom->label, e.atom->amino_acid,
                         e.atom->coords, e.is_rotamer_atom});
  }
  return ctx;
}

} // namespace

AtomContext knn_context(const Structure& s, const ResidueRecord& center,
                        int k) {
  return build_context(s, center, nullptr, k);
}

AtomContext knn_context(const Structure& s, const ResidueRecord& center,
                        const ResidueRecord& replacement, int k) {
  return build_context(s, center, &replacement, k);
}

} // namespace rforge
