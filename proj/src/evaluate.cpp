#include "rforge/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rforge/angles.hpp"
#include "rforge/error.hpp"
#include "rforge/geometry.hpp"

namespace rforge {

std::string_view to_string(Burial b) {
  switch (b) {
  case Burial::Buried: return "buried";
  case Burial::Intermediate: return "intermediate";
  case Burial::Surface: return "surface";
  }
  return "?";
}

BurialClass classify_burial(const Structure& s, const ResidueRecord& residue) {
  const AtomRecord* anchor = residue.anchor_atom();
  if (!anchor)
    throw IncompleteResidueError("burial: residue " +
                                 std::to_string(residue.residue_index) +
                                 " has no anchor atom");
  int count = 0;
  for (const Chain& chain : s.chains) {
    for (const ResidueRecord& other : chain.residues) {
      if (chain.id == residue.chain_id &&
          other.residue_index == residue.residue_index)
        continue;
      const AtomRecord* oa = other.anchor_atom();
      if (oa && (oa->coords - anchor->coords).norm() <= 10.0)
        ++count;
    }
  }
  Burial cls = Burial::Intermediate;
  if (count >= 24)
    cls = Burial::Buried;
  else if (count <= 16)
    cls = Burial::Surface;
  return {cls, count};
}

namespace {

bool symmetric_terminal(AminoAcid aa, std::size_t chi_index) {
  switch (aa) {
  case AminoAcid::Asp:
  case AminoAcid::Phe:
  case AminoAcid::Tyr:
    return chi_index == 1; // chi2
  case AminoAcid::Glu:
    return chi_index == 2; // chi3
  default:
    return false;
  }
}

} // namespace

bool is_recovered(std::span<const double> chi_pred,
                  std::span<const double> chi_true, AminoAcid aa,
                  bool symmetry_aware) {
  if (chi_pred.size() != chi_true.size())
    throw std::invalid_argument("is_recovered: chi length mismatch");
  for (std::size_t i = 0; i < chi_pred.size(); ++i) {
    double d = std::abs(angle_diff_deg(chi_pred[i], chi_true[i]));
    if (symmetry_aware && symmetric_terminal(aa, i))
      d = std::min(d, 180.0 - d);
    if (d > 20.0)
      return false;
  }
  return true;
}

ModelScorer::ModelScorer(std::vector<const EnergyModel*> models)
    : models_(std::move(models)) {
  if (models_.empty())
    throw std::invalid_argument("ModelScorer: no models");
}

std::vector<double> ModelScorer::score(std::span<const ScoreItem> items) const {
  std::vector<FeaturizedContext> fcs;
  fcs.reserve(items.size());
  for (const auto& item : items)
    fcs.push_back(*item.context);
  std::vector<double> out(items.size(), 0.0);
  for (const EnergyModel* m : models_) {
    const auto e = m->energy_batch(fcs);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += e[i];
  }
  for (auto& v : out)
    v /= double(models_.size());
  return out;
}

EvalOutput recover_rotamers(const CandidateScorer& scorer, const Structure& s,
                            const RotamerLibrary& lib,
                            const ChiDefinitionTable& table,
                            const EvalOptions& opts) {
  EvalOutput out;
  struct Task {
    const ResidueRecord* residue;
  };
  std::vector<Task> tasks;
  for (const Chain& chain : s.chains)
    for (const ResidueRecord& r : chain.residues)
      if (is_rotameric_for_prediction(r.amino_acid))
        tasks.push_back({&r});

  const std::size_t n_atoms = s.atom_count();
  std::vector<std::optional<ResidueResult>> results(tasks.size());
  std::vector<std::optional<SkippedResidue>> skipped(tasks.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < std::ptrdiff_t(tasks.size()); ++ti) {
    const ResidueRecord& residue = *tasks[ti].residue;
    auto skip = [&](const std::string& reason) {
      skipped[ti] = SkippedResidue{residue.chain_id, residue.residue_index,
                                   residue.amino_acid, reason};
    };
    if (!residue.complete || residue.chi.empty()) {
      skip("incomplete residue");
      continue;
    }
    if (!residue.phi || !residue.psi) {
      skip("undefined backbone torsions");
      continue;
    }
    if (n_atoms < static_cast<std::size_t>(opts.k)) {
      skip("structure smaller than context size");
      continue;
    }

    // Per-residue stream keyed by (seed, chain, residue index) so results do
    // not depend on scheduling.
    Rng rng(derive_seed(opts.seed,
                        (std::uint64_t(std::uint8_t(residue.chain_id)) << 32) ^
                            std::uint64_t(std::uint32_t(residue.residue_index))));

    const BurialClass burial = classify_burial(s, residue);
    std::vector<RotamerCandidate> candidates;
    try {
      if (opts.protocol == Protocol::Discrete)
        candidates = candidates_discrete(lib, residue.amino_acid, *residue.phi,
                                         *residue.psi,
                                         burial.cls == Burial::Buried);
      else
        candidates = sample_continuous(lib, residue.amino_acid, *residue.phi,
                                       *residue.psi, opts.eval_samples, rng);
    } catch (const Error& e) {
      skip(e.what());
      continue;
    }

    std::vector<Rotation> rotations;
    rotations.reserve(opts.rotations);
    for (int r = 0; r < opts.rotations; ++r)
      rotations.push_back(Rotation::random(rng));

    // Featurize every candidate under every shared rotation.
    std::vector<FeaturizedContext> fcs;
    fcs.reserve(candidates.size() * rotations.size());
    for (const auto& cand : candidates) {
      const ResidueRecord rebuilt = apply_chi(residue, cand.chi, table);
      const AtomContext ctx = knn_context(s, residue, rebuilt, opts.k);
      for (const Rotation& rot : rotations)
        fcs.push_back(featurize(ctx, rot));
    }
    std::vector<ScoreItem> items;
    items.reserve(fcs.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      for (std::size_t r = 0; r < rotations.size(); ++r)
        items.push_back({&fcs[c * rotations.size() + r], candidates[c].chi,
                         residue.chi, residue.amino_acid});
    const std::vector<double> scores = scorer.score(items);

    int best = 0;
    double best_energy = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      double mean = 0;
      for (std::size_t r = 0; r < rotations.size(); ++r)
        mean += scores[c * rotations.size() + r];
      mean /= double(rotations.size());
      if (!std::isfinite(mean)) {
        skip("non-finite candidate energy");
        goto next_residue;
      }
      if (mean < best_energy) {
        best_energy = mean;
        best = static_cast<int>(c);
      }
    }
    {
      ResidueResult rr;
      rr.structure_id = s.id;
      rr.chain_id = residue.chain_id;
      rr.residue_index = residue.residue_index;
      rr.amino_acid = residue.amino_acid;
      rr.burial = burial;
      rr.n_candidates = static_cast<int>(candidates.size());
      rr.chosen_chi = candidates[best].chi;
      rr.native_chi = residue.chi;
      rr.chosen_energy = best_energy;
      rr.recovered = is_recovered(rr.chosen_chi, rr.native_chi,
                                  residue.amino_acid, opts.symmetry_aware);
      results[ti] = std::move(rr);
    }
  next_residue:;
  }

  for (auto& r : results)
    if (r)
      out.results.push_back(std::move(*r));
  for (auto& r : skipped)
    if (r)
      out.skipped.push_back(std::move(*r));
  return out;
}

RecoveryReport aggregate(std::span<const ResidueResult> results) {
  if (results.empty())
    throw Error("aggregate: no residue results");
  RecoveryReport report;
  for (const auto& r : results) {
    ++report.total;
    report.recovered += r.recovered;
    if (r.burial.cls == Burial::Buried) {
      ++report.buried_total;
      report.buried_recovered += r.recovered;
    } else if (r.burial.cls == Burial::Surface) {
      ++report.surface_total;
      report.surface_recovered += r.recovered;
    }
    auto& [total, rec] = report.per_aa[r.amino_acid];
    ++total;
    rec += r.recovered;
  }
  return report;
}

nlohmann::json report_json(const RecoveryReport& report) {
  nlohmann::json j;
  j["Avg"] = report.avg_pct();
  if (auto b = report.buried_pct())
    j["Buried"] = *b;
  else
    j["Buried"] = nullptr;
  if (auto s = report.surface_pct())
    j["Surface"] = *s;
  else
    j["Surface"] = nullptr;
  nlohmann::json per_aa = nlohmann::json::object();
  for (const auto& [aa, counts] : report.per_aa)
    per_aa[std::string(to_string(aa))] =
        100.0 * counts.second / counts.first;
  j["per_amino_acid"] = per_aa;
  j["counts"] = {
      {"total", report.total},
      {"recovered", report.recovered},
      {"buried_total", report.buried_total},
      {"buried_recovered", report.buried_recovered},
      {"surface_total", report.surface_total},
      {"surface_recovered", report.surface_recovered},
  };
  return j;
}

std::string results_csv(std::span<const ResidueResult> results) {
  std::string out =
      "id,aa,burial,n_candidates,chosen_chi,native_chi,recovered,energy\n";
  char buf[64];
  auto join = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.4f", v[i]);
      if (i)
        s += ';';
      s += buf;
    }
    return s;
  };
  for (const auto& r : results) {
    out += r.structure_id;
    out += ':';
    out += r.chain_id;
    out += ':';
    out += std::to_string(r.residue_index);
    out += ',';
    out += to_string(r.amino_acid);
    out += ',';
    out += to_string(r.burial.cls);
    out += ',';
    out += std::to_string(r.n_candidates);
    out += ',';
    out += join(r.chosen_chi);
    out += ',';
    out += join(r.native_chi);
    out += ',';
    out += r.recovered ? '1' : '0';
    std::snprintf(buf, sizeof(buf), ",%.8g\n", r.chosen_energy);
    out += buf;
  }
  return out;
}

} // namespace rforge
