#include "rforge/analysis.hpp"

#include <cmath>
#include <cstdio>

#include "rforge/angles.hpp"
#include "rforge/error.hpp"
#include "rforge/geometry.hpp"

namespace rforge {

EnergyScan chi_scan(const CandidateScorer& scorer, const Structure& s,
                    const ResidueRecord& residue,
                    const ChiDefinitionTable& table, int chi_index,
                    double step_deg, int n_rotations, int k,
                    std::uint64_t seed) {
  if (residue.chi.empty() ||
      chi_index >= static_cast<int>(residue.chi.size()) || chi_index < 0)
    throw std::invalid_argument("chi_scan: chi index out of range");
  if (step_deg <= 0 || std::fmod(360.0, step_deg) != 0.0)
    throw std::invalid_argument("chi_scan: step must divide 360");

  EnergyScan scan;
  scan.structure_id = s.id;
  scan.chain_id = residue.chain_id;
  scan.residue_index = residue.residue_index;
  scan.chi_index = chi_index;
  scan.step_deg = step_deg;
  scan.n_rotations = n_rotations;

  Rng rng(derive_seed(seed,
                      (std::uint64_t(std::uint8_t(residue.chain_id)) << 32) ^
                          std::uint64_t(std::uint32_t(residue.residue_index))));
  std::vector<Rotation> rotations;
  for (int r = 0; r < n_rotations; ++r)
    rotations.push_back(Rotation::random(rng));

  const int n_offsets = static_cast<int>(std::lround(360.0 / step_deg));
  std::vector<std::vector<double>> chi_variants;
  std::vector<FeaturizedContext> fcs;
  fcs.reserve(n_offsets * n_rotations);
  for (int i = 0; i < n_offsets; ++i) {
    const double offset = -180.0 + i * step_deg;
    scan.offset_deg.push_back(offset);
    std::vector<double> chi = residue.chi;
    chi[chi_index] = wrap_deg(chi[chi_index] + offset);
    const ResidueRecord rebuilt = apply_chi(residue, chi, table);
    const AtomContext ctx = knn_context(s, residue, rebuilt, k);
    chi_variants.push_back(std::move(chi));
    for (const Rotation& rot : rotations)
      fcs.push_back(featurize(ctx, rot));
  }

  std::vector<ScoreItem> items;
  items.reserve(fcs.size());
  for (int i = 0; i < n_offsets; ++i)
    for (int r = 0; r < n_rotations; ++r)
      items.push_back({&fcs[std::size_t(i) * n_rotations + r],
                       chi_variants[i], residue.chi, residue.amino_acid});
  const std::vector<double> scores = scorer.score(items);

  for (int i = 0; i < n_offsets; ++i) {
    double mean = 0;
    for (int r = 0; r < n_rotations; ++r)
      mean += scores[std::size_t(i) * n_rotations + r];
    scan.mean_energy.push_back(mean / n_rotations);
  }
  return scan;
}

SaliencyMap saliency(const EnergyModel& model, const FeaturizedContext& fc) {
  Eigen::MatrixXd dcoords;
  model.energy_input_grad(fc, dcoords);
  SaliencyMap map;
  map.magnitude.reserve(dcoords.rows());
  for (Eigen::Index i = 0; i < dcoords.rows(); ++i) {
    const double m = dcoords.row(i).norm();
    if (!std::isfinite(m))
      throw NumericError("saliency: non-finite gradient");
    map.magnitude.push_back(m);
  }
  return map;
}

std::vector<ContextEmbedding> embed_contexts(const EnergyModel& model,
                                             const Structure& s, int k) {
  std::vector<ContextEmbedding> out;
  for (const Chain& chain : s.chains) {
    for (const ResidueRecord& residue : chain.residues) {
      if (!residue.anchor_atom())
        continue;
      if (s.atom_count() < static_cast<std::size_t>(k))
        continue;
      const AtomContext ctx = knn_context(s, residue, k);
      ContextEmbedding e;
      e.chain_id = residue.chain_id;
      e.residue_index = residue.residue_index;
      e.amino_acid = residue.amino_acid;
      e.burial = classify_burial(s, residue);
      e.vector = model.pooled_embedding(featurize(ctx, Rotation::identity()));
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::string scan_csv(const EnergyScan& scan) {
  std::string out = "id,chi_index,offset_deg,mean_energy\n";
  char buf[128];
  for (std::size_t i = 0; i < scan.offset_deg.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s:%c:%d,%d,%.1f,%.8g\n",
                  scan.structure_id.c_str(), scan.chain_id,
                  scan.residue_index, scan.chi_index + 1, scan.offset_deg[i],
                  scan.mean_energy[i]);
    out += buf;
  }
  return out;
}

std::string saliency_csv(const AtomContext& ctx, const SaliencyMap& map) {
  std::string out = "atom_index,element,label,magnitude\n";
  char buf[96];
  for (std::size_t i = 0; i < map.magnitude.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%s,%s,%.8g\n", i,
                  std::string(to_string(ctx.atoms[i].element)).c_str(),
                  std::string(to_string(ctx.atoms[i].label)).c_str(),
                  map.magnitude[i]);
    out += buf;
  }
  return out;
}

std::string embeddings_csv(std::span<const ContextEmbedding> embeddings) {
  std::string out = "id,burial";
  if (!embeddings.empty())
    for (Eigen::Index j = 0; j < embeddings.front().vector.size(); ++j)
      out += ",v" + std::to_string(j);
  out += "\n";
  char buf[32];
  for (const auto& e : embeddings) {
    out += std::string(1, e.chain_id) + ":" + std::to_string(e.residue_index);
    out += ",";
    out += to_string(e.burial.cls);
    for (Eigen::Index j = 0; j < e.vector.size(); ++j) {
      std::snprintf(buf, sizeof(buf), ",%.6g", e.vector[j]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

} // namespace rforge
