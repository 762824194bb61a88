#include "rforge/rotamer_library.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rforge/angles.hpp"
#include "rforge/error.hpp"

namespace rforge {

namespace {

int wrap_bin(double angle) {
  const double w = wrap_deg(angle);
  const int bin = static_cast<int>(std::floor((w + 180.0) / 10.0));
  return ((bin % kRotamerGridBins) + kRotamerGridBins) % kRotamerGridBins;
}

bool same_id(const std::array<int, 4>& a, const std::array<int, 4>& b) {
  return a == b;
}

} // namespace

bool RotamerLibrary::has(AminoAcid aa) const {
  return !grid_[static_cast<int>(aa)].empty();
}

std::span<const RotamerEntry> RotamerLibrary::bin(AminoAcid aa, int phi_bin,
                                                  int psi_bin) const {
  const auto& g = grid_[static_cast<int>(aa)];
  if (g.empty())
    return {};
  return g[phi_bin * kRotamerGridBins + psi_bin];
}

RotamerLibrary RotamerLibrary::parse(std::istream& in) {
  RotamerLibrary lib;
  std::string line;
  std::size_t lineno = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ls(line);
    std::string aa_tok;
    double phi, psi;
    long count;
    std::array<int, 4> rid;
    double prob;
    std::array<double, 4> mean, sigma;
    if (!(ls >> aa_tok >> phi >> psi >> count >> rid[0] >> rid[1] >> rid[2] >>
          rid[3] >> prob >> mean[0] >> mean[1] >> mean[2] >> mean[3] >>
          sigma[0] >> sigma[1] >> sigma[2] >> sigma[3]))
      throw ParseError("bad rotamer library row", lineno);
    auto aa = amino_acid_from_code(aa_tok);
    if (!aa)
      continue; // non-canonical residue rows are ignored
    const int n_chi = chi_count(*aa);
    if (n_chi == 0)
      continue;
    if (prob < 0)
      throw ParseError("negative probability", lineno);
    if (prob == 0)
      continue; // zero-probability rows dropped
    auto& g = lib.grid_[static_cast<int>(*aa)];
    if (g.empty())
      g.resize(kRotamerGridBins * kRotamerGridBins);
    auto& bin = g[wrap_bin(phi) * kRotamerGridBins + wrap_bin(psi)];
    // phi/psi = +180 rows duplicate the -180 bin; skip re-inserts of the
    // same rotamer id.
    bool dup = false;
    for (const auto& e : bin)
      dup = dup || same_id(e.rotamer_id, rid);
    if (dup)
      continue;
    RotamerEntry entry;
    entry.rotamer_id = rid;
    entry.probability = prob;
    for (int i = 0; i < n_chi; ++i) {
      if (!(sigma[i] > 0))
        throw ParseError("chi sigma must be positive", lineno);
      entry.chi_mean.push_back(wrap_deg(mean[i]));
      entry.chi_sigma.push_back(sigma[i]);
    }
    bin.push_back(std::move(entry));
    any = true;
  }
  if (!any)
    throw ParseError("rotamer library has no usable rows");

  for (int a = 0; a < kNumAminoAcids; ++a) {
    auto& g = lib.grid_[a];
    for (auto& bin : g) {
      if (bin.empty())
        continue;
      double sum = 0;
      for (const auto& e : bin)
        sum += e.probability;
      if (std::abs(sum - 1.0) > 1e-2)
        throw ParseError("bin probabilities for " +
                         std::string(to_string(static_cast<AminoAcid>(a))) +
                         " sum to " + std::to_string(sum));
      std::stable_sort(bin.begin(), bin.end(),
                       [](const RotamerEntry& x, const RotamerEntry& y) {
                         if (x.probability != y.probability)
                           return x.probability > y.probability;
                         return x.rotamer_id < y.rotamer_id;
                       });
    }
  }
  return lib;
}

RotamerLibrary RotamerLibrary::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open rotamer library " + path.string());
  return parse(in);
}

std::array<BilinearCorner, 4> bilinear_weights(double phi, double psi) {
  const double gx = (wrap_deg(phi) + 180.0) / kRotamerGridSpacingDeg;
  const double gy = (wrap_deg(psi) + 180.0) / kRotamerGridSpacingDeg;
  const int ix = static_cast<int>(std::floor(gx)) % kRotamerGridBins;
  const int iy = static_cast<int>(std::floor(gy)) % kRotamerGridBins;
  const double fx = gx - std::floor(gx);
  const double fy = gy - std::floor(gy);
  const int ix1 = (ix + 1) % kRotamerGridBins;
  const int iy1 = (iy + 1) % kRotamerGridBins;
  return {{{ix, iy, (1 - fx) * (1 - fy)},
           {ix1, iy, fx * (1 - fy)},
           {ix, iy1, (1 - fx) * fy},
           {ix1, iy1, fx * fy}}};
}

std::vector<RotamerComponent> interpolate(const RotamerLibrary& lib,
                                          AminoAcid aa, double phi,
                                          double psi) {
  if (!lib.has(aa))
    return {};
  const auto corners = bilinear_weights(phi, psi);

  struct Acc {
    double probability = 0;
    double weight_sum = 0;
    std::vector<std::pair<double, const RotamerEntry*>> parts;
  };
  std::map<std::array<int, 4>, Acc> merged;
  for (const auto& c : corners) {
    if (c.weight == 0)
      continue;
    for (const RotamerEntry& e : lib.bin(aa, c.phi_bin, c.psi_bin)) {
      Acc& acc = merged[e.rotamer_id];
      acc.probability += c.weight * e.probability;
      acc.weight_sum += c.weight;
      acc.parts.emplace_back(c.weight, &e);
    }
  }

  std::vector<RotamerComponent> out;
  out.reserve(merged.size());
  for (auto& [rid, acc] : merged) {
    RotamerComponent comp;
    comp.rotamer_id = rid;
    comp.probability = acc.probability;
    const std::size_t n_chi = acc.parts.front().second->chi_mean.size();
    for (std::size_t i = 0; i < n_chi; ++i) {
      // Shortest-arc weighted mean, anchored at the first contributing bin.
      const double ref = acc.parts.front().second->chi_mean[i];
      double mean_off = 0;
      double sigma = 0;
      for (const auto& [w, e] : acc.parts) {
        const double wn = w / acc.weight_sum;
        mean_off += wn * wrap_deg(e->chi_mean[i] - ref);
        sigma += wn * e->chi_sigma[i];
      }
      comp.chi_mean.push_back(wrap_deg(ref + mean_off));
      comp.chi_sigma.push_back(sigma);
    }
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end(),
            [](const RotamerComponent& a, const RotamerComponent& b) {
              if (a.probability != b.probability)
                return a.probability > b.probability;
              return a.rotamer_id < b.rotamer_id;
            });
  return out;
}

std::vector<RotamerCandidate> sample_training(const RotamerLibrary& lib,
                                              AminoAcid aa, double phi,
                                              double psi, int n, Rng& rng) {
  if (n < 1)
    throw std::invalid_argument("sample_training: n must be >= 1");
  const auto comps = interpolate(lib, aa, phi, psi);
  if (comps.empty())
    throw Error("no rotamer components for " + std::string(to_string(aa)));
  std::vector<RotamerCandidate> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    const auto& comp = comps[rng.uniform_index(comps.size())];
    RotamerCandidate cand;
    cand.probability = comp.probability;
    cand.source = CandidateSource::ContinuousDraw;
    for (std::size_t i = 0; i < comp.chi_mean.size(); ++i)
      cand.chi.push_back(
          wrap_deg(rng.normal(comp.chi_mean[i], comp.chi_sigma[i])));
    out.push_back(std::move(cand));
  }
  return out;
}

std::vector<RotamerCandidate> candidates_discrete(const RotamerLibrary& lib,
                                                  AminoAcid aa, double phi,
                                                  double psi, bool buried) {
  const auto comps = interpolate(lib, aa, phi, psi);
  if (comps.empty())
    throw Error("no rotamer components for " + std::string(to_string(aa)));
  double total = 0;
  for (const auto& c : comps)
    total += c.probability;
  const double threshold = (buried ? 0.98 : 0.95) * total;

  std::vector<RotamerCandidate> out;
  double cum = 0;
  for (const auto& comp : comps) {
    RotamerCandidate base;
    base.probability = comp.probability;
    base.source = CandidateSource::Mean;
    base.chi = comp.chi_mean;
    if (!buried) {
      out.push_back(base);
    } else {
      // Expand chi1 and chi2 over {mean - sigma, mean, mean + sigma}.
      const int n_chi = static_cast<int>(comp.chi_mean.size());
      const int n1 = 3;
      const int n2 = n_chi >= 2 ? 3 : 1;
      for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
          RotamerCandidate cand = base;
          cand.chi[0] =
              wrap_deg(comp.chi_mean[0] + (i - 1) * comp.chi_sigma[0]);
          if (n_chi >= 2)
            cand.chi[1] =
                wrap_deg(comp.chi_mean[1] + (j - 1) * comp.chi_sigma[1]);
          cand.source = (i == 1 && j == 1) ? CandidateSource::Mean
                                           : CandidateSource::SigmaVariant;
          out.push_back(std::move(cand));
        }
      }
    }
    cum += comp.probability;
    if (cum >= threshold)
      break;
  }

  // Remove near-duplicates (wrap-aware, 1e-6 degrees), keeping the first.
  std::vector<RotamerCandidate> unique;
  for (auto& cand : out) {
    for (auto& v : cand.chi)
      v = wrap_deg(v);
    bool dup = false;
    for (const auto& kept : unique) {
      bool all_close = kept.chi.size() == cand.chi.size();
      for (std::size_t i = 0; all_close && i < cand.chi.size(); ++i)
        all_close = std::abs(angle_diff_deg(kept.chi[i], cand.chi[i])) <= 1e-6;
      if (all_close) {
        dup = true;
        break;
      }
    }
    if (!dup)
      unique.push_back(std::move(cand));
  }
  return unique;
}

std::vector<RotamerCandidate> sample_continuous(const RotamerLibrary& lib,
                                                AminoAcid aa, double phi,
                                                double psi, int n, Rng& rng) {
  if (n < 1)
    throw std::invalid_argument("sample_continuous: n must be >= 1");
  const auto comps = interpolate(lib, aa, phi, psi);
  if (comps.empty())
    throw Error("no rotamer components for " + std::string(to_string(aa)));
  double total = 0;
  for (const auto& c : comps)
    total += c.probability;

  std::vector<RotamerCandidate> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    const double u = rng.uniform() * total;
    double cum = 0;
    const RotamerComponent* pick = &comps.back();
    for (const auto& comp : comps) {
      cum += comp.probability;
      if (u < cum) {
        pick = &comp;
        break;
      }
    }
    RotamerCandidate cand;
    cand.probability = pick->probability;
    cand.source = CandidateSource::ContinuousDraw;
    for (std::size_t i = 0; i < pick->chi_mean.size(); ++i)
      cand.chi.push_back(
          wrap_deg(rng.normal(pick->chi_mean[i], pick->chi_sigma[i])));
    out.push_back(std::move(cand));
  }
  return out;
}

} // namespace rforge
