#include "rforge/chi_table.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rforge/error.hpp"

namespace rforge {

namespace {

// Mirror of data/chi_definitions.txt; a unit test keeps the two in sync.
constexpr std::string_view kEmbeddedTable = R"(# chi-definitions v1
ARG 1 N CA CB CG | CG CD NE CZ NH1 NH2
ARG 2 CA CB CG CD | CD NE CZ NH1 NH2
ARG 3 CB CG CD NE | NE CZ NH1 NH2
ARG 4 CG CD NE CZ | CZ NH1 NH2
ASN 1 N CA CB CG | CG OD1 ND2
ASN 2 CA CB CG OD1 | OD1 ND2
ASP 1 N CA CB CG | CG OD1 OD2
ASP 2 CA CB CG OD1 | OD1 OD2
CYS 1 N CA CB SG | SG
GLN 1 N CA CB CG | CG CD OE1 NE2
GLN 2 CA CB CG CD | CD OE1 NE2
GLN 3 CB CG CD OE1 | OE1 NE2
GLU 1 N CA CB CG | CG CD OE1 OE2
GLU 2 CA CB CG CD | CD OE1 OE2
GLU 3 CB CG CD OE1 | OE1 OE2
HIS 1 N CA CB CG | CG ND1 CD2 CE1 NE2
HIS 2 CA CB CG ND1 | ND1 CD2 CE1 NE2
ILE 1 N CA CB CG1 | CG1 CG2 CD1
ILE 2 CA CB CG1 CD1 | CD1
LEU 1 N CA CB CG | CG CD1 CD2
LEU 2 CA CB CG CD1 | CD1 CD2
LYS 1 N CA CB CG | CG CD CE NZ
LYS 2 CA CB CG CD | CD CE NZ
LYS 3 CB CG CD CE | CE NZ
LYS 4 CG CD CE NZ | NZ
MET 1 N CA CB CG | CG SD CE
MET 2 CA CB CG SD | SD CE
MET 3 CB CG SD CE | CE
PHE 1 N CA CB CG | CG CD1 CD2 CE1 CE2 CZ
PHE 2 CA CB CG CD1 | CD1 CD2 CE1 CE2 CZ
PRO 1 N CA CB CG | CG CD
PRO 2 CA CB CG CD | CD
SER 1 N CA CB OG | OG
THR 1 N CA CB OG1 | OG1 CG2
TRP 1 N CA CB CG | CG CD1 CD2 NE1 CE2 CE3 CZ2 CZ3 CH2
TRP 2 CA CB CG CD1 | CD1 CD2 NE1 CE2 CE3 CZ2 CZ3 CH2
TYR 1 N CA CB CG | CG CD1 CD2 CE1 CE2 CZ OH
TYR 2 CA CB CG CD1 | CD1 CD2 CE1 CE2 CZ OH
VAL 1 N CA CB CG1 | CG1 CG2
)";

AtomLabel parse_label(const std::string& tok, AminoAcid aa, std::size_t line) {
  auto label = atom_label_from_name(tok);
  if (!label)
    throw ParseError("unknown atom label '" + tok + "'", line);
  auto canon = canonical_atoms(aa);
  if (std::find(canon.begin(), canon.end(), *label) == canon.end())
    throw ParseError("atom '" + tok + "' is not canonical for " +
                         std::string(to_string(aa)),
                     line);
  return *label;
}

} // namespace

ChiDefinitionTable ChiDefinitionTable::parse(std::string_view text) {
  ChiDefinitionTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ls(line);
    std::string aa_tok;
    int chi_index = 0;
    ls >> aa_tok >> chi_index;
    auto aa = amino_acid_from_code(aa_tok);
    if (!aa || chi_index < 1 || chi_index > 4)
      throw ParseError("bad chi definition '" + line + "'", lineno);
    auto& defs = table.defs_[static_cast<int>(*aa)];
    if (static_cast<int>(defs.size()) + 1 != chi_index)
      throw ParseError("chi indices must be consecutive", lineno);
    ChiDef def;
    std::string tok;
    for (auto& q : def.quad) {
      if (!(ls >> tok))
        throw ParseError("missing quadruple atom", lineno);
      q = parse_label(tok, *aa, lineno);
    }
    if (!(ls >> tok) || tok != "|")
      throw ParseError("expected '|' before downstream atoms", lineno);
    while (ls >> tok)
      def.downstream.push_back(parse_label(tok, *aa, lineno));
    if (def.downstream.empty())
      throw ParseError("empty downstream set", lineno);
    // Nested-downstream invariant: every downstream set is contained in the
    // previous chi's set.
    if (!defs.empty()) {
      const auto& prev = defs.back().downstream;
      for (AtomLabel l : def.downstream)
        if (std::find(prev.begin(), prev.end(), l) == prev.end())
          throw ParseError("downstream sets are not nested", lineno);
    }
    defs.push_back(std::move(def));
  }
  for (int i = 0; i < kNumAminoAcids; ++i) {
    auto aa = static_cast<AminoAcid>(i);
    if (static_cast<int>(table.defs_[i].size()) != rforge::chi_count(aa))
      throw ParseError("chi table has " + std::to_string(table.defs_[i].size()) +
                       " entries for " + std::string(to_string(aa)) +
                       ", expected " + std::to_string(rforge::chi_count(aa)));
  }
  return table;
}

ChiDefinitionTable ChiDefinitionTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open chi definition file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ChiDefinitionTable& ChiDefinitionTable::standard() {
  static const ChiDefinitionTable table = parse(kEmbeddedTable);
  return table;
}

} // namespace rforge
