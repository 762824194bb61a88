#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unordered_set>

#include "rforge/dataset.hpp"
#include "rforge/error.hpp"
#include "rforge/pdb.hpp"
#include "rforge/structure.hpp"
#include "support/peptide_builder.hpp"

using namespace rforge;
namespace ts = rforge::testsupport;

namespace {

const char* kMseFixture =
    "HEADER    TEST PROTEIN                            01-JAN-20   XMSE\n"
    "REMARK   2 RESOLUTION.    1.50 ANGSTROMS.\n"
    "REMARK   3   R VALUE            (WORKING SET) : 0.180\n"
    "HETATM    1  N   MSE A   1       0.000   0.000   0.000  1.00 20.00"
    "           N\n"
    "HETATM    2  CA  MSE A   1       1.458   0.000   0.000  1.00 20.00"
    "           C\n"
    "HETATM    3  C   MSE A   1       2.009   1.420   0.000  1.00 20.00"
    "           C\n"
    "HETATM    4  O   MSE A   1       1.251   2.390   0.000  1.00 20.00"
    "           O\n"
    "HETATM    5  CB  MSE A   1       2.000  -0.750  -1.200  1.00 20.00"
    "           C\n"
    "HETATM    6  CG  MSE A   1       1.500  -2.190  -1.300  1.00 20.00"
    "           C\n"
    "HETATM    7 SE   MSE A   1       2.200  -3.100  -2.800  1.00 20.00"
    "          SE\n"
    "HETATM    8  CE  MSE A   1       1.300  -4.700  -2.600  1.00 20.00"
    "           C\n"
    "END\n";

} // namespace

TEST_CASE("parse_pdb rejects empty input") {
  CHECK_THROWS_AS(parse_pdb(""), ParseError);
  CHECK_THROWS_AS(parse_pdb("   \n  \n"), ParseError);
}

TEST_CASE("parse_pdb reads a hand-written ATOM line") {
  const std::string text =
      "ATOM      1  N   ALA A   1       1.000   2.000   3.000  1.00  0.00"
      "           N\n";
  Structure s = parse_pdb(text, "tiny");
  REQUIRE(s.chains.size() == 1);
  REQUIRE(s.chains[0].residues.size() == 1);
  const auto& r = s.chains[0].residues[0];
  REQUIRE(r.atoms.size() == 1);
  CHECK(r.atoms[0].label == AtomLabel::N);
  CHECK(r.atoms[0].element == Element::N);
  CHECK(r.atoms[0].coords == Vec3(1.0, 2.0, 3.0));
  CHECK(r.amino_acid == AminoAcid::Ala);
  CHECK(!r.complete); // CA, C, O, CB missing
  CHECK(s.id == "tiny");
}

TEST_CASE("parse_pdb maps MSE to methionine with Se typed as S") {
  Structure s = parse_pdb(kMseFixture);
  CHECK(s.id == "XMSE");
  CHECK(s.resolution == 1.5);
  CHECK(s.r_value == 0.18);
  REQUIRE(s.chains.size() == 1);
  const auto& r = s.chains[0].residues[0];
  CHECK(r.amino_acid == AminoAcid::Met);
  const AtomRecord* sd = r.find(AtomLabel::SD);
  REQUIRE(sd != nullptr);
  CHECK(sd->element == Element::S);
  CHECK(r.complete);
}

TEST_CASE("parse_pdb drops hydrogens") {
  const std::string text =
      "ATOM      1  N   ALA A   1       1.000   2.000   3.000  1.00  0.00"
      "           N\n"
      "ATOM      2  H   ALA A   1       1.500   2.500   3.000  1.00  0.00"
      "           H\n"
      "ATOM      3 1HB  ALA A   1       1.700   2.700   3.100  1.00  0.00\n";
  Structure s = parse_pdb(text);
  CHECK(s.atom_count() == 1);
  CHECK(s.stats.hydrogens_dropped == 2);
}

TEST_CASE("parse_pdb resolves altlocs to highest occupancy, first on ties") {
  const std::string text =
      "ATOM      1  N  AALA A   1       1.000   0.000   0.000  0.40  0.00"
      "           N\n"
      "ATOM      2  N  BALA A   1       2.000   0.000   0.000  0.60  0.00"
      "           N\n"
      "ATOM      3  CA AALA A   1       3.000   0.000   0.000  0.50  0.00"
      "           C\n"
      "ATOM      4  CA BALA A   1       4.000   0.000   0.000  0.50  0.00"
      "           C\n";
  Structure s = parse_pdb(text);
  const auto& r = s.chains[0].residues[0];
  CHECK(r.find(AtomLabel::N)->coords.x() == 2.0);  // higher occupancy
  CHECK(r.find(AtomLabel::CA)->coords.x() == 3.0); // tie: first listed
}

TEST_CASE("parse_pdb names the line in coordinate errors") {
  const std::string text =
      "ATOM      1  N   ALA A   1       1.000   2.000   3.000  1.00  0.00\n"
      "ATOM      2  CA  ALA A   1       bogus   2.000   3.000  1.00  0.00\n";
  try {
    parse_pdb(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("parse_pdb drops non-MSE HETATM and unknown residues") {
  const std::string text =
      "ATOM      1  N   ALA A   1       1.000   2.000   3.000  1.00  0.00"
      "           N\n"
      "HETATM    2  O   HOH A 101       0.000   0.000   0.000  1.00  0.00"
      "           O\n";
  Structure s = parse_pdb(text);
  CHECK(s.atom_count() == 1);
  CHECK(s.stats.hetatm_dropped == 1);
}

TEST_CASE("parse_pdb enforces increasing residue indices per chain") {
  const std::string text =
      "ATOM      1  N   ALA A   5       1.000   2.000   3.000  1.00  0.00"
      "           N\n"
      "ATOM      2  N   GLY A   4       2.000   2.000   3.000  1.00  0.00"
      "           N\n"
      "ATOM      3  N   SER A   6       3.000   2.000   3.000  1.00  0.00"
      "           N\n";
  Structure s = parse_pdb(text);
  REQUIRE(s.chains.size() == 1);
  REQUIRE(s.chains[0].residues.size() == 2);
  CHECK(s.chains[0].residues[0].residue_index == 5);
  CHECK(s.chains[0].residues[1].residue_index == 6);
  CHECK(s.stats.residues_dropped == 1);
}

TEST_CASE("parsing is deterministic and annotates torsions") {
  ts::ChainSpec spec;
  spec.residues = {{AminoAcid::Ala, 0, -47, {}},
                   {AminoAcid::Leu, -57, -47, {-60, 170}},
                   {AminoAcid::Ser, -57, 140, {60}}};
  Structure built = ts::build_structure({spec}, "det1", 1.2, 0.15);
  const std::string text = ts::to_pdb_text(built);

  Structure a = parse_pdb(text);
  Structure b = parse_pdb(text);
  CHECK(a == b);
  CHECK(a.id == "det1");
  const auto& leu = a.chains[0].residues[1];
  CHECK(leu.complete);
  REQUIRE(leu.phi.has_value());
  REQUIRE(leu.psi.has_value());
  CHECK(*leu.phi == doctest::Approx(-57.0).epsilon(1e-3));
  CHECK(*leu.psi == doctest::Approx(-47.0).epsilon(1e-3));
  REQUIRE(leu.chi.size() == 2);
  CHECK(leu.chi[0] == doctest::Approx(-60.0).epsilon(1e-3));
  CHECK(leu.chi[1] == doctest::Approx(170.0).epsilon(1e-3));
}

TEST_CASE("every parsed atom's element is in the 4-element vocabulary") {
  ts::ChainSpec spec;
  spec.residues = {{AminoAcid::Met, 0, 140, {-60, 180, 70}},
                   {AminoAcid::Cys, -57, -47, {-65}},
                   {AminoAcid::Trp, -57, 140, {-70, 100}}};
  Structure s = parse_pdb(ts::to_pdb_text(ts::build_structure({spec}, "elem", 1.0, 0.1)));
  for (const auto& chain : s.chains)
    for (const auto& r : chain.residues)
      for (const auto& a : r.atoms) {
        const int e = static_cast<int>(a.element);
        CHECK(e >= 0);
        CHECK(e < kNumElements);
        CHECK(a.coords.allFinite());
      }
}

TEST_CASE("structure serialization round-trips exactly") {
  ts::ChainSpec spec;
  spec.residues = {{AminoAcid::Gly, 0, -47, {}},
                   {AminoAcid::Tyr, -57, -47, {-65, 90}},
                   {AminoAcid::Val, -130, 135, {175}}};
  Structure s = ts::build_structure({spec}, "rt1", 1.33, 0.21);
  Structure back = deserialize_structure(serialize_structure(s));
  CHECK(back == s);
  // A second hop is still identical.
  CHECK(deserialize_structure(serialize_structure(back)) == s);
}

TEST_CASE("filter_dataset applies the resolution and R-value thresholds") {
  std::vector<StructureMeta> metas = {
      {"keep", 1.5, 0.20, {}},
      {"badres", 1.9, 0.20, {}},
      {"badr", 1.5, 0.30, {}},
  };
  auto m = filter_dataset(metas, {});
  REQUIRE(m.entries.size() == 1);
  CHECK(m.entries[0].id == "keep");
}

TEST_CASE("filter_dataset drops boundary values (strict less-than)") {
  std::vector<StructureMeta> metas = {{"edge", 1.8, 0.25, {}}};
  CHECK(filter_dataset(metas, {}).entries.empty());
}

TEST_CASE("filter_dataset on empty input yields an empty manifest") {
  CHECK(filter_dataset({}, {}).entries.empty());
}

TEST_CASE("filter_dataset counts entries with missing metadata") {
  std::vector<StructureMeta> metas = {{"nores", std::nullopt, 0.2, {}},
                                      {"ok", 1.2, 0.2, {}}};
  auto m = filter_dataset(metas, {});
  CHECK(m.entries.size() == 1);
  CHECK(m.missing_metadata == 1);
}

TEST_CASE("filter_dataset honors the exclusion list") {
  std::vector<StructureMeta> metas = {{"a", 1.5, 0.2, {}}, {"b", 1.5, 0.2, {}}};
  auto m = filter_dataset(metas, {"b"});
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[1].split == Split::Excluded);
  CHECK(m.entries[0].split != Split::Excluded);
}

TEST_CASE("filter_dataset split is deterministic and near 5% validation") {
  std::vector<StructureMeta> metas;
  for (int i = 0; i < 2000; ++i)
    metas.push_back({"id" + std::to_string(i), 1.5, 0.2, {}});
  FilterOptions opts;
  opts.seed = 17;
  auto m1 = filter_dataset(metas, {}, opts);
  auto m2 = filter_dataset(metas, {}, opts);
  REQUIRE(m1.entries.size() == m2.entries.size());
  int val = 0;
  for (std::size_t i = 0; i < m1.entries.size(); ++i) {
    CHECK(m1.entries[i].split == m2.entries[i].split);
    val += m1.entries[i].split == Split::Validation;
  }
  // Binomial(2000, 0.05): mean 100, sigma ~9.7; allow 4 sigma.
  CHECK(val > 60);
  CHECK(val < 140);

  opts.seed = 18;
  auto m3 = filter_dataset(metas, {}, opts);
  int moved = 0;
  for (std::size_t i = 0; i < m1.entries.size(); ++i)
    moved += m1.entries[i].split != m3.entries[i].split;
  CHECK(moved > 0); // different seed reshuffles the split
}

TEST_CASE("manifest text round-trips") {
  std::vector<StructureMeta> metas = {{"a", 1.5, 0.2, "x/a.pdb"},
                                      {"b", 1.2, 0.21, "x/b.pdb"}};
  auto m = filter_dataset(metas, {"b"});
  auto back = manifest_from_text(manifest_to_text(m));
  REQUIRE(back.entries.size() == m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(back.entries[i].id == m.entries[i].id);
    CHECK(back.entries[i].split == m.entries[i].split);
    CHECK(back.entries[i].resolution == m.entries[i].resolution);
    CHECK(back.entries[i].r_value == m.entries[i].r_value);
    CHECK(back.entries[i].path == m.entries[i].path);
  }
}
