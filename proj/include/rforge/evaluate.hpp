#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rforge/chi_table.hpp"
#include "rforge/model.hpp"
#include "rforge/rotamer_library.hpp"
#include "rforge/structure.hpp"

namespace rforge {

enum class Burial { Buried, Intermediate, Surface };

std::string_view to_string(Burial b);

struct BurialClass {
  Burial cls;
  int neighbor_count;
};

// Counts other residues whose CB (CA for glycine) lies within 10 A of this
// residue's CB (CA for glycine): >= 24 buried, <= 16 surface, else
// intermediate.
BurialClass classify_burial(const Structure& s, const ResidueRecord& residue);

// True iff every chi difference is within 20 degrees under wrap-around. With
// symmetry_aware (default), the 180-degree-symmetric terminal torsions (chi2
// of Asp/Phe/Tyr, chi3 of Glu) compare modulo 180.
bool is_recovered(std::span<const double> chi_pred,
                  std::span<const double> chi_true, AminoAcid aa,
                  bool symmetry_aware = true);

enum class Protocol { Discrete, Continuous };

struct EvalOptions {
  Protocol protocol = Protocol::Discrete;
  int k = kDefaultContextSize;
  int rotations = 10;      // shared scoring rotations per residue
  int eval_samples = 1000; // continuous-protocol draws per residue
  std::uint64_t seed = 0;
  bool symmetry_aware = true;
};

// One candidate pose under one scoring rotation.
struct ScoreItem {
  const FeaturizedContext* context;
  std::span<const double> candidate_chi;
  std::span<const double> native_chi;
  AminoAcid amino_acid;
};

class CandidateScorer {
public:
  virtual ~CandidateScorer() = default;
  virtual std::vector<double> score(std::span<const ScoreItem> items) const = 0;
};

// Scores with a model or an ensemble (mean of member energies).
class ModelScorer : public CandidateScorer {
public:
  explicit ModelScorer(std::vector<const EnergyModel*> models);
  std::vector<double> score(std::span<const ScoreItem> items) const override;

private:
  std::vector<const EnergyModel*> models_;
};

struct ResidueResult {
  std::string structure_id;
  char chain_id;
  int residue_index;
  AminoAcid amino_acid;
  BurialClass burial;
  int n_candidates;
  std::vector<double> chosen_chi;
  std::vector<double> native_chi;
  double chosen_energy;
  bool recovered;
};

struct SkippedResidue {
  char chain_id;
  int residue_index;
  AminoAcid amino_acid;
  std::string reason;
};

struct EvalOutput {
  std::vector<ResidueResult> results;
  std::vector<SkippedResidue> skipped;
};

// The rotamer-recovery protocol: per rotameric residue, classify burial,
// enumerate candidates (discrete rotamer-trials style, or continuous
// probability-weighted draws), rebuild the side chain per candidate,
// re-extract the k-NN context, score under `rotations` shared random
// rotations, pick the argmin-energy candidate (ties to the lowest index) and
// compare against the native chi. The native configuration is not added to
// the candidate set.
EvalOutput recover_rotamers(const CandidateScorer& scorer, const Structure& s,
                            const RotamerLibrary& lib,
                            const ChiDefinitionTable& table,
                            const EvalOptions& opts);

struct RecoveryReport {
  int total = 0;
  int recovered = 0;
  int buried_total = 0;
  int buried_recovered = 0;
  int surface_total = 0;
  int surface_recovered = 0;
  std::map<AminoAcid, std::pair<int, int>> per_aa; // total, recovered

  double avg_pct() const { return 100.0 * recovered / total; }
  std::optional<double> buried_pct() const {
    if (!buried_total)
      return std::nullopt;
    return 100.0 * buried_recovered / buried_total;
  }
  std::optional<double> surface_pct() const {
    if (!surface_total)
      return std::nullopt;
    return 100.0 * surface_recovered / surface_total;
  }
};

// Throws on empty input. Intermediate burial counts toward the average but
// neither the buried nor surface rows.
RecoveryReport aggregate(std::span<const ResidueResult> results);

// Top-level keys Avg/Buried/Surface; zero-count cells are null, and
// per_amino_acid lists only types that occur.
nlohmann::json report_json(const RecoveryReport& report);

// Columns: id, aa, burial, n_candidates, chosen_chi, native_chi, recovered,
// energy. Chi arrays are ';'-joined.
std::string results_csv(std::span<const ResidueResult> results);

} // namespace rforge
