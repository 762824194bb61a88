#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <span>
#include <vector>

#include "rforge/rng.hpp"
#include "rforge/types.hpp"

namespace rforge {

inline constexpr int kRotamerGridSpacingDeg = 10;
inline constexpr int kRotamerGridBins = 36; // 360 / 10, phi = -180 .. 170

// One library row: a rotamer with its probability and per-chi Gaussians.
struct RotamerEntry {
  std::array<int, 4> rotamer_id; // r1..r4 columns; identity across bins
  double probability;
  std::vector<double> chi_mean;  // degrees, one per chi
  std::vector<double> chi_sigma; // degrees, > 0
};

// Backbone-dependent rotamer table on a 10-degree phi/psi grid with
// wrap-around (phi = -180 and phi = +180 are the same bin). Entries per bin
// are sorted by descending probability.
class RotamerLibrary {
public:
  static RotamerLibrary parse(std::istream& in);
  static RotamerLibrary parse_file(const std::filesystem::path& path);

  bool has(AminoAcid aa) const;
  // Bin indices in [0, 36); index 0 covers phi (or psi) = -180.
  std::span<const RotamerEntry> bin(AminoAcid aa, int phi_bin,
                                    int psi_bin) const;

private:
  // [aa][phi_bin * kRotamerGridBins + psi_bin]
  std::array<std::vector<std::vector<RotamerEntry>>, kNumAminoAcids> grid_;
};

struct BilinearCorner {
  int phi_bin;
  int psi_bin;
  double weight;
};

// The 4 grid corners around (phi, psi) with wrap-around and their bilinear
// weights; weights are nonnegative and sum to 1.
std::array<BilinearCorner, 4> bilinear_weights(double phi, double psi);

// A rotamer component after bilinear merging across the 4 corners. Means are
// combined on the shortest arc; mean/sigma weights renormalize over the
// corners that carry the component.
struct RotamerComponent {
  std::array<int, 4> rotamer_id;
  double probability;
  std::vector<double> chi_mean;
  std::vector<double> chi_sigma;
};

// Sorted by descending probability. Empty for types absent from the library
// (Gly/Ala).
std::vector<RotamerComponent> interpolate(const RotamerLibrary& lib,
                                          AminoAcid aa, double phi,
                                          double psi);

enum class CandidateSource { Mean, SigmaVariant, ContinuousDraw };

struct RotamerCandidate {
  std::vector<double> chi; // degrees in [-180, 180)
  double probability;      // source component probability
  CandidateSource source;
};

// Training sampler q(x|c): picks a component uniformly (library probabilities
// ignored), then draws each chi from the component's Gaussian.
std::vector<RotamerCandidate> sample_training(const RotamerLibrary& lib,
                                              AminoAcid aa, double phi,
                                              double psi, int n, Rng& rng);

// Rotamer-trials style discrete candidates: accumulate components by
// descending probability up to 98% (buried) or 95% mass, at least one; each
// kept component contributes chi = mean, and buried positions also expand
// chi1/chi2 over {mean - sigma, mean, mean + sigma}. Near-duplicates
// (within 1e-6 degrees) are removed.
std::vector<RotamerCandidate> candidates_discrete(const RotamerLibrary& lib,
                                                  AminoAcid aa, double phi,
                                                  double psi, bool buried);

// Evaluation sampler: components weighted by library probability.
std::vector<RotamerCandidate> sample_continuous(const RotamerLibrary& lib,
                                                AminoAcid aa, double phi,
                                                double psi, int n, Rng& rng);

} // namespace rforge
