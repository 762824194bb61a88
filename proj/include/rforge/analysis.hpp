#pragma once

#include <span>
#include <string>
#include <vector>

#include "rforge/evaluate.hpp"
#include "rforge/model.hpp"

namespace rforge {

struct EnergyScan {
  std::string structure_id;
  char chain_id;
  int residue_index;
  int chi_index;
  double step_deg;
  int n_rotations;
  std::vector<double> offset_deg;   // grid over [-180, 180)
  std::vector<double> mean_energy;  // averaged over the shared rotations
};

inline constexpr int kDefaultScanRotations = 100;

// Perturbs one chi angle of the residue across the unit circle: for each
// offset the side chain is rebuilt at native + offset, the k-NN context
// re-extracted, and the score averaged over n_rotations shared random
// rotations.
EnergyScan chi_scan(const CandidateScorer& scorer, const Structure& s,
                    const ResidueRecord& residue,
                    const ChiDefinitionTable& table, int chi_index,
                    double step_deg, int n_rotations, int k,
                    std::uint64_t seed);

struct SaliencyMap {
  std::vector<double> magnitude; // per atom, ||dE/dcoords||_2
};

// Per-atom L2 norm of the analytic energy gradient w.r.t. that atom's input
// coordinates.
SaliencyMap saliency(const EnergyModel& model, const FeaturizedContext& fc);

struct ContextEmbedding {
  char chain_id;
  int residue_index;
  AminoAcid amino_acid;
  BurialClass burial;
  Eigen::VectorXd vector; // post-pooling, pre-MLP hidden vector
};

// Deterministic (identity rotation) embedding of every residue's k-atom
// context, tagged with its burial class. Residues without an anchor atom are
// skipped.
std::vector<ContextEmbedding> embed_contexts(const EnergyModel& model,
                                             const Structure& s, int k);

// CSV renderings (schemas documented in the README).
std::string scan_csv(const EnergyScan& scan);
std::string saliency_csv(const AtomContext& ctx, const SaliencyMap& map);
std::string embeddings_csv(std::span<const ContextEmbedding> embeddings);

} // namespace rforge
