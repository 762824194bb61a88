#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "rforge/angles.hpp"
#include "rforge/error.hpp"
#include "rforge/rotamer_library.hpp"

using namespace rforge;

namespace {

// SER rows in the 4 bins around (phi=-63, psi=42), same two rotamers in each
// bin so components merge across corners.
std::string four_bin_ser() {
  std::ostringstream out;
  out << "# test library\n";
  auto row = [&](int phi, int psi, int rid, double prob, double mean,
                 double sig) {
    out << "SER " << phi << " " << psi << " 100 " << rid
        << " 0 0 0 " << prob << " " << mean << " 0 0 0 " << sig
        << " 0 0 0\n";
  };
  // (phi, psi) corners: (-70,40) (-60,40) (-70,50) (-60,50)
  row(-70, 40, 1, 0.70, 62.0, 8.0);
  row(-70, 40, 2, 0.30, -65.0, 9.0);
  row(-60, 40, 1, 0.60, 66.0, 8.5);
  row(-60, 40, 2, 0.40, -61.0, 9.5);
  row(-70, 50, 1, 0.80, 58.0, 7.5);
  row(-70, 50, 2, 0.20, -69.0, 8.5);
  row(-60, 50, 1, 0.50, 64.0, 9.0);
  row(-60, 50, 2, 0.50, -63.0, 10.0);
  return out.str();
}

RotamerLibrary lib_from(const std::string& text) {
  std::istringstream in(text);
  return RotamerLibrary::parse(in);
}

// Leucine single-bin fixture with the worked-example probabilities.
std::string leu_single_bin(double phi, double psi) {
  std::ostringstream out;
  auto row = [&](int rid, double prob, double m1, double m2, double s1,
                 double s2) {
    out << "LEU " << phi << " " << psi << " 100 " << rid << " " << rid
        << " 0 0 " << prob << " " << m1 << " " << m2 << " 0 0 " << s1 << " "
        << s2 << " 0 0\n";
  };
  row(1, 0.60, -60.0, 170.0, 8.0, 9.0);
  row(2, 0.30, 180.0, 65.0, 7.0, 8.0);
  row(3, 0.08, 60.0, 90.0, 9.0, 10.0);
  row(4, 0.02, -170.0, -60.0, 10.0, 11.0);
  return out.str();
}

} // namespace

TEST_CASE("parse rejects an empty library") {
  CHECK_THROWS_AS(lib_from(""), ParseError);
  CHECK_THROWS_AS(lib_from("# only comments\n"), ParseError);
}

TEST_CASE("parse orders a hand-written two-row SER bin by probability") {
  // Rows fed lowest-probability first; (phi=-60, psi=-40).
  std::ostringstream out;
  out << "SER -60 -40 50 2 0 0 0 0.3 -65.0 0 0 0 9.0 0 0 0\n";
  out << "SER -60 -40 50 1 0 0 0 0.7 62.0 0 0 0 8.0 0 0 0\n";
  auto lib = lib_from(out.str());
  CHECK(lib.has(AminoAcid::Ser));
  const int phi_bin = (-60 + 180) / 10;
  const int psi_bin = (-40 + 180) / 10;
  auto bin = lib.bin(AminoAcid::Ser, phi_bin, psi_bin);
  REQUIRE(bin.size() == 2);
  CHECK(bin[0].probability == 0.7);
  CHECK(bin[1].probability == 0.3);
  CHECK(bin[0].chi_mean.size() == 1); // one chi for SER
}

TEST_CASE("grid spacing is 10 degrees") {
  CHECK(kRotamerGridSpacingDeg == 10);
  CHECK(kRotamerGridBins == 36);
}

TEST_CASE("parse rejects bins whose probabilities do not sum to 1") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 0.5 62.0 0 0 0 8.0 0 0 0\n";
  out << "SER -60 -40 50 2 0 0 0 0.3 -65.0 0 0 0 9.0 0 0 0\n";
  CHECK_THROWS_AS(lib_from(out.str()), ParseError);
}

TEST_CASE("parse drops zero-probability rows") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 62.0 0 0 0 8.0 0 0 0\n";
  out << "SER -60 -40 50 2 0 0 0 0.0 -65.0 0 0 0 9.0 0 0 0\n";
  auto lib = lib_from(out.str());
  CHECK(lib.bin(AminoAcid::Ser, 12, 14).size() == 1);
}

TEST_CASE("phi/psi +180 rows alias the -180 bin") {
  std::ostringstream out;
  out << "SER -180 -180 50 1 0 0 0 1.0 62.0 0 0 0 8.0 0 0 0\n";
  out << "SER 180 -180 50 1 0 0 0 1.0 62.0 0 0 0 8.0 0 0 0\n";
  auto lib = lib_from(out.str());
  CHECK(lib.bin(AminoAcid::Ser, 0, 0).size() == 1);
}

TEST_CASE("bilinear weights reproduce the hand-computed example") {
  auto corners = bilinear_weights(-63.0, 42.0);
  std::map<std::pair<int, int>, double> got;
  double sum = 0;
  for (const auto& c : corners) {
    got[{c.phi_bin, c.psi_bin}] = c.weight;
    sum += c.weight;
    CHECK(c.weight >= 0.0);
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  const int b70 = 11, b60 = 12, b40 = 22, b50 = 23;
  CHECK(got[{b60, b40}] == doctest::Approx(0.56).epsilon(1e-9));
  CHECK(got[{b70, b40}] == doctest::Approx(0.24).epsilon(1e-9));
  CHECK(got[{b60, b50}] == doctest::Approx(0.14).epsilon(1e-9));
  CHECK(got[{b70, b50}] == doctest::Approx(0.06).epsilon(1e-9));
}

TEST_CASE("bilinear weights sum to 1 over random queries") {
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    const double phi = rng.uniform() * 720 - 360;
    const double psi = rng.uniform() * 720 - 360;
    auto corners = bilinear_weights(phi, psi);
    double sum = 0;
    for (const auto& c : corners) {
      CHECK(c.weight >= 0.0);
      sum += c.weight;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("interpolation at a grid point returns that bin verbatim") {
  auto lib = lib_from(four_bin_ser());
  auto comps = interpolate(lib, AminoAcid::Ser, -70.0, 40.0);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].probability == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(comps[0].chi_mean[0] == doctest::Approx(62.0).epsilon(1e-12));
  CHECK(comps[0].chi_sigma[0] == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(comps[1].probability == doctest::Approx(0.30).epsilon(1e-12));
}

TEST_CASE("interpolation at the center of 4 bins uses equal weights") {
  auto corners = bilinear_weights(-65.0, 45.0);
  for (const auto& c : corners)
    CHECK(c.weight == doctest::Approx(0.25).epsilon(1e-9));

  auto lib = lib_from(four_bin_ser());
  auto comps = interpolate(lib, AminoAcid::Ser, -65.0, 45.0);
  REQUIRE(comps.size() == 2);
  // Component 1 probability: mean of (0.7, 0.6, 0.8, 0.5).
  CHECK(comps[0].probability == doctest::Approx(0.65).epsilon(1e-9));
  // Component 1 mean: mean of (62, 66, 58, 64).
  CHECK(comps[0].chi_mean[0] == doctest::Approx(62.5).epsilon(1e-9));
}

TEST_CASE("interpolated components merge with hand-computed weights") {
  auto lib = lib_from(four_bin_ser());
  auto comps = interpolate(lib, AminoAcid::Ser, -63.0, 42.0);
  REQUIRE(comps.size() == 2);
  // Corner weights: (-70,40)=0.24 (-60,40)=0.56 (-70,50)=0.06 (-60,50)=0.14.
  const double p1 = 0.24 * 0.70 + 0.56 * 0.60 + 0.06 * 0.80 + 0.14 * 0.50;
  const double m1 = 0.24 * 62.0 + 0.56 * 66.0 + 0.06 * 58.0 + 0.14 * 64.0;
  const double s1 = 0.24 * 8.0 + 0.56 * 8.5 + 0.06 * 7.5 + 0.14 * 9.0;
  CHECK(comps[0].probability == doctest::Approx(p1).epsilon(1e-9));
  CHECK(comps[0].chi_mean[0] == doctest::Approx(m1).epsilon(1e-9));
  CHECK(comps[0].chi_sigma[0] == doctest::Approx(s1).epsilon(1e-9));
}

TEST_CASE("interpolation handles means straddling +-180 on the short arc") {
  std::ostringstream out;
  out << "SER -70 40 50 1 0 0 0 1.0 175.0 0 0 0 8.0 0 0 0\n";
  out << "SER -60 40 50 1 0 0 0 1.0 -175.0 0 0 0 8.0 0 0 0\n";
  out << "SER -70 50 50 1 0 0 0 1.0 175.0 0 0 0 8.0 0 0 0\n";
  out << "SER -60 50 50 1 0 0 0 1.0 -175.0 0 0 0 8.0 0 0 0\n";
  auto lib = lib_from(out.str());
  auto comps = interpolate(lib, AminoAcid::Ser, -65.0, 45.0);
  REQUIRE(comps.size() == 1);
  // A naive average gives 0; the short-arc combination stays near 180.
  CHECK(std::abs(std::abs(comps[0].chi_mean[0]) - 180.0) < 1e-6);
}

TEST_CASE("interpolation is continuous across bin edges") {
  auto lib = lib_from(four_bin_ser());
  // The phi edge between the two bin columns sits at -70 + 10 = -60 ... use
  // the interior edge at phi = -70 of the (-70,40) bin? The populated patch
  // spans phi [-70,-60], psi [40,50]; probe the psi = 50 edge from inside.
  auto lo = interpolate(lib, AminoAcid::Ser, -65.0, 50.0 - 1e-6);
  auto hi = interpolate(lib, AminoAcid::Ser, -65.0, 50.0);
  REQUIRE(lo.size() == hi.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(std::abs(lo[i].probability - hi[i].probability) < 1e-3);
    CHECK(std::abs(angle_diff_deg(lo[i].chi_mean[0], hi[i].chi_mean[0])) <
          1e-3);
    CHECK(std::abs(lo[i].chi_sigma[0] - hi[i].chi_sigma[0]) < 1e-3);
  }
}

TEST_CASE("interpolation of an absent type returns an empty list") {
  auto lib = lib_from(four_bin_ser());
  CHECK(interpolate(lib, AminoAcid::Gly, -63.0, 42.0).empty());
  CHECK(interpolate(lib, AminoAcid::Ala, -63.0, 42.0).empty());
}

TEST_CASE("training sampler concentrates at the mean when sigma -> 0") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 62.0 0 0 0 1e-12 0 0 0\n";
  auto lib = lib_from(out.str());
  Rng rng(5);
  auto draws = sample_training(lib, AminoAcid::Ser, -60, -40, 100, rng);
  for (const auto& d : draws)
    CHECK(std::abs(d.chi[0] - 62.0) < 1e-6);
}

TEST_CASE("training sampler picks components uniformly despite probabilities") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 0.9 90.0 0 0 0 1.0 0 0 0\n";
  out << "SER -60 -40 50 2 0 0 0 0.1 -90.0 0 0 0 1.0 0 0 0\n";
  auto lib = lib_from(out.str());
  Rng rng(7);
  const int n = 10000;
  auto draws = sample_training(lib, AminoAcid::Ser, -60, -40, n, rng);
  int first = 0;
  for (const auto& d : draws)
    first += d.chi[0] > 0;
  // Uniform pick: mean n/2, sigma = sqrt(n*0.25) = 50; allow 3 sigma.
  CHECK(std::abs(first - n / 2) < 3 * 50);
}

TEST_CASE("training sampler chi mean converges to the component mean") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 62.0 0 0 0 8.0 0 0 0\n";
  auto lib = lib_from(out.str());
  Rng rng(11);
  const int n = 10000;
  auto draws = sample_training(lib, AminoAcid::Ser, -60, -40, n, rng);
  double mean = 0;
  for (const auto& d : draws)
    mean += d.chi[0];
  mean /= n;
  CHECK(std::abs(mean - 62.0) < 3 * 8.0 / std::sqrt(double(n)));
}

TEST_CASE("training sampler wraps draws into [-180, 180)") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 179.0 0 0 0 30.0 0 0 0\n";
  auto lib = lib_from(out.str());
  Rng rng(13);
  auto draws = sample_training(lib, AminoAcid::Ser, -60, -40, 2000, rng);
  for (const auto& d : draws) {
    CHECK(d.chi[0] >= -180.0);
    CHECK(d.chi[0] < 180.0);
  }
}

TEST_CASE("samplers fail cleanly on empty interpolation") {
  auto lib = lib_from(four_bin_ser());
  Rng rng(1);
  CHECK_THROWS_AS(sample_training(lib, AminoAcid::Gly, 0, 0, 1, rng), Error);
  CHECK_THROWS_AS(sample_continuous(lib, AminoAcid::Gly, 0, 0, 1, rng), Error);
  CHECK_THROWS_AS(candidates_discrete(lib, AminoAcid::Gly, 0, 0, false),
                  Error);
}

TEST_CASE("discrete candidates keep 3 of 4 components when not buried") {
  auto lib = lib_from(leu_single_bin(-60, -40));
  auto cands = candidates_discrete(lib, AminoAcid::Leu, -60, -40, false);
  // Cumulative 0.6, 0.9, 0.98 >= 0.95: three components, chi at the mean.
  REQUIRE(cands.size() == 3);
  CHECK(cands[0].chi[0] == doctest::Approx(-60.0));
  CHECK(std::abs(angle_diff_deg(cands[1].chi[0], 180.0)) < 1e-9);
  CHECK(cands[2].chi[0] == doctest::Approx(60.0));
  for (const auto& c : cands)
    CHECK(c.source == CandidateSource::Mean);
}

TEST_CASE("discrete candidates for buried residues expand chi1/chi2") {
  auto lib = lib_from(leu_single_bin(-60, -40));
  auto cands = candidates_discrete(lib, AminoAcid::Leu, -60, -40, true);
  // Buried: same 3 components, each at 3x3 sigma variants.
  CHECK(cands.size() == 27);
  int mean_sources = 0;
  for (const auto& c : cands)
    mean_sources += c.source == CandidateSource::Mean;
  CHECK(mean_sources == 3);
}

TEST_CASE("a single-component bin yields exactly one candidate") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 62.0 0 0 0 8.0 0 0 0\n";
  auto lib = lib_from(out.str());
  auto cands = candidates_discrete(lib, AminoAcid::Ser, -60, -40, false);
  CHECK(cands.size() == 1);
}

TEST_CASE("duplicate candidates are removed when sigma is tiny") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 62.0 0 0 0 1e-9 0 0 0\n";
  auto lib = lib_from(out.str());
  auto cands = candidates_discrete(lib, AminoAcid::Ser, -60, -40, true);
  CHECK(cands.size() == 1); // mu-sigma, mu, mu+sigma collapse
}

TEST_CASE("discrete candidates are deterministic across reordered input") {
  // Same bins, rows permuted: parse sorts by probability, so candidate order
  // is identical.
  std::ostringstream a, b;
  a << "LEU -60 -40 50 1 1 0 0 0.6 -60 170 0 0 8 9 0 0\n";
  a << "LEU -60 -40 50 2 2 0 0 0.4 180 65 0 0 7 8 0 0\n";
  b << "LEU -60 -40 50 2 2 0 0 0.4 180 65 0 0 7 8 0 0\n";
  b << "LEU -60 -40 50 1 1 0 0 0.6 -60 170 0 0 8 9 0 0\n";
  auto ca = candidates_discrete(lib_from(a.str()), AminoAcid::Leu, -60, -40,
                                false);
  auto cb = candidates_discrete(lib_from(b.str()), AminoAcid::Leu, -60, -40,
                                false);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i)
    CHECK(ca[i].chi == cb[i].chi);
}

TEST_CASE("continuous sampler follows library probabilities") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 0.9 90.0 0 0 0 1.0 0 0 0\n";
  out << "SER -60 -40 50 2 0 0 0 0.1 -90.0 0 0 0 1.0 0 0 0\n";
  auto lib = lib_from(out.str());
  Rng rng(17);
  const int n = 10000;
  auto draws = sample_continuous(lib, AminoAcid::Ser, -60, -40, n, rng);
  int first = 0;
  for (const auto& d : draws) {
    first += d.chi[0] > 0;
    CHECK(d.chi[0] >= -180.0);
    CHECK(d.chi[0] < 180.0);
  }
  // Binomial(n, 0.9): sigma = sqrt(n * 0.09) = 30; allow 3 sigma.
  CHECK(std::abs(first - 9000) < 90);
}

TEST_CASE("continuous sampler with sigma -> 0 returns the mean") {
  std::ostringstream out;
  out << "SER -60 -40 50 1 0 0 0 1.0 62.0 0 0 0 1e-12 0 0 0\n";
  auto lib = lib_from(out.str());
  Rng rng(19);
  for (const auto& d :
       sample_continuous(lib, AminoAcid::Ser, -60, -40, 50, rng))
    CHECK(std::abs(d.chi[0] - 62.0) < 1e-6);
}

TEST_CASE("samplers are reproducible under a fixed seed") {
  auto lib = lib_from(four_bin_ser());
  Rng a(99), b(99);
  auto da = sample_training(lib, AminoAcid::Ser, -63, 42, 50, a);
  auto db = sample_training(lib, AminoAcid::Ser, -63, 42, 50, b);
  REQUIRE(da.size() == db.size());
  for (std::size_t i = 0; i < da.size(); ++i)
    CHECK(da[i].chi == db[i].chi);
}
