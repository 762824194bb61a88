#include "rforge/pdb.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "rforge/chi_table.hpp"
#include "rforge/error.hpp"
#include "rforge/geometry.hpp"

namespace rforge {

namespace {

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string_view field(std::string_view line, std::size_t col0,
                       std::size_t len) {
  if (line.size() <= col0)
    return {};
  return trimmed(line.substr(col0, std::min(len, line.size() - col0)));
}

double parse_double(std::string_view s, const char* what, std::size_t lineno) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(std::string("malformed ") + what + " field '" +
                         std::string(s) + "'",
                     lineno);
  return v;
}

int parse_int(std::string_view s, const char* what, std::size_t lineno) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(std::string("malformed ") + what + " field '" +
                         std::string(s) + "'",
                     lineno);
  return v;
}

struct RawAtom {
  std::string name;
  char altloc;
  AminoAcid aa;
  char chain;
  int resseq;
  char icode;
  Vec3 coords;
  double occupancy;
  std::size_t file_order;
};

bool is_hydrogen(std::string_view element_field, std::string_view name) {
  if (element_field == "H" || element_field == "D")
    return true;
  if (!element_field.empty())
    return false;
  // No element column: H names are like "H", "HB2", "1HG1", "2HD2".
  std::string_view n = name;
  if (!n.empty() && std::isdigit(static_cast<unsigned char>(n.front())))
    n.remove_prefix(1);
  return !n.empty() && (n.front() == 'H' || n.front() == 'D');
}

std::optional<double> parse_resolution(std::string_view line) {
  // REMARK   2 RESOLUTION.    1.80 ANGSTROMS.
  auto pos = line.find("RESOLUTION.");
  if (pos == std::string_view::npos)
    return std::nullopt;
  std::istringstream rest{std::string(line.substr(pos + 11))};
  double v;
  if (rest >> v)
    return v;
  return std::nullopt;
}

std::optional<double> parse_r_value(std::string_view line) {
  // First REMARK 3 "R VALUE" line with a number; FREE R VALUE is skipped, so
  // this reads the working-set (or overall) R.
  if (line.find("FREE R VALUE") != std::string_view::npos)
    return std::nullopt;
  auto pos = line.find("R VALUE");
  if (pos == std::string_view::npos)
    return std::nullopt;
  auto colon = line.find(':', pos);
  if (colon == std::string_view::npos)
    return std::nullopt;
  std::istringstream rest{std::string(line.substr(colon + 1))};
  double v;
  if (rest >> v)
    return v;
  return std::nullopt;
}

} // namespace

Structure parse_pdb(std::string_view text, std::string_view fallback_id) {
  if (trimmed(text).empty())
    throw ParseError("empty structure file");

  Structure s;
  s.id = std::string(fallback_id);

  std::vector<RawAtom> raw;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::size_t order = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view lv = line;
    std::string_view rec = field(lv, 0, 6);
    if (rec == "ENDMDL")
      break; // first model only
    if (rec == "HEADER") {
      std::string_view id = field(lv, 62, 4);
      if (!id.empty())
        s.id = std::string(id);
      continue;
    }
    if (rec == "REMARK") {
      const int remark_no =
          lv.size() > 9 ? std::atoi(std::string(field(lv, 7, 3)).c_str()) : 0;
      if (remark_no == 2 && !s.resolution)
        s.resolution = parse_resolution(lv);
      else if (remark_no == 3 && !s.r_value)
        s.r_value = parse_r_value(lv);
      continue;
    }
    if (rec != "ATOM" && rec != "HETATM")
      continue;

    std::string_view resname = field(lv, 17, 3);
    const bool is_mse = resname == "MSE";
    if (rec == "HETATM" && !is_mse) {
      ++s.stats.hetatm_dropped;
      continue;
    }
    auto aa = is_mse ? std::optional<AminoAcid>(AminoAcid::Met)
                     : amino_acid_from_code(resname);
    if (!aa) {
      ++s.stats.atoms_dropped;
      continue;
    }

    std::string_view name = field(lv, 12, 4);
    std::string_view element = field(lv, 76, 2);
    if (is_hydrogen(element, name)) {
      ++s.stats.hydrogens_dropped;
      continue;
    }

    RawAtom a;
    a.name = std::string(name);
    if (is_mse && a.name == "SE")
      a.name = "SD"; // selenium takes methionine's sulfur position
    if (*aa == AminoAcid::Ile && a.name == "CD")
      a.name = "CD1"; // legacy isoleucine naming
    a.altloc = lv.size() > 16 ? lv[16] : ' ';
    a.aa = *aa;
    a.chain = lv.size() > 21 ? lv[21] : ' ';
    a.resseq = parse_int(field(lv, 22, 4), "residue number", lineno);
    a.icode = lv.size() > 26 ? lv[26] : ' ';
    a.coords = Vec3(parse_double(field(lv, 30, 8), "x coordinate", lineno),
                    parse_double(field(lv, 38, 8), "y coordinate", lineno),
                    parse_double(field(lv, 46, 8), "z coordinate", lineno));
    if (!a.coords.allFinite())
      throw ParseError("non-finite coordinate", lineno);
    std::string_view occ = field(lv, 54, 6);
    a.occupancy = 1.0;
    if (!occ.empty()) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(occ.data(), occ.data() + occ.size(), v);
      if (ec == std::errc{} && ptr == occ.data() + occ.size())
        a.occupancy = v;
    }
    a.file_order = order++;
    raw.push_back(std::move(a));
  }
  if (raw.empty())
    throw ParseError("no atoms found");

  // Group into residues keyed by (chain, resseq, icode), in encounter order;
  // within a residue resolve alternate locations per atom name.
  struct ResidueBucket {
    char chain;
    int resseq;
    char icode;
    AminoAcid aa;
    std::map<std::string, RawAtom> atoms; // name -> winner
  };
  std::vector<ResidueBucket> buckets;
  auto find_bucket = [&](const RawAtom& a) -> ResidueBucket& {
    if (!buckets.empty()) {
      auto& b = buckets.back();
      if (b.chain == a.chain && b.resseq == a.resseq && b.icode == a.icode)
        return b;
    }
    for (auto& b : buckets)
      if (b.chain == a.chain && b.resseq == a.resseq && b.icode == a.icode)
        return b;
    buckets.push_back({a.chain, a.resseq, a.icode, a.aa, {}});
    return buckets.back();
  };
  for (auto& a : raw) {
    ResidueBucket& b = find_bucket(a);
    auto it = b.atoms.find(a.name);
    if (it == b.atoms.end()) {
      b.atoms.emplace(a.name, std::move(a));
    } else if (a.occupancy > it->second.occupancy) {
      it->second = std::move(a); // higher occupancy wins; ties keep first
      ++s.stats.atoms_dropped;
    } else {
      ++s.stats.atoms_dropped;
    }
  }

  // Assemble chains in encounter order, enforcing strictly increasing
  // residue indices within each chain.
  for (const auto& b : buckets) {
    Chain* chain = nullptr;
    for (auto& c : s.chains)
      if (c.id == b.chain)
        chain = &c;
    if (!chain) {
      s.chains.push_back({b.chain, {}});
      chain = &s.chains.back();
    }
    if (!chain->residues.empty() &&
        b.resseq <= chain->residues.back().residue_index) {
      ++s.stats.residues_dropped;
      s.stats.atoms_dropped += static_cast<int>(b.atoms.size());
      continue;
    }
    ResidueRecord r;
    r.amino_acid = b.aa;
    r.residue_index = b.resseq;
    r.chain_id = b.chain;
    auto canon = canonical_atoms(b.aa);
    auto add = [&](AtomLabel label) {
      for (const auto& [name, atom] : b.atoms) {
        auto parsed = atom_label_from_name(name);
        if (parsed && *parsed == label) {
          r.atoms.push_back(
              {element_of(label), label, b.aa, b.resseq, b.chain, atom.coords});
          return true;
        }
      }
      return false;
    };
    int placed = 0;
    for (AtomLabel label : canon)
      placed += add(label);
    if (add(AtomLabel::OXT))
      ++placed;
    s.stats.atoms_dropped += static_cast<int>(b.atoms.size()) - placed;
    if (r.atoms.empty()) {
      ++s.stats.residues_dropped;
      continue;
    }
    chain->residues.push_back(std::move(r));
  }
  s.chains.erase(std::remove_if(s.chains.begin(), s.chains.end(),
                                [](const Chain& c) { return c.residues.empty(); }),
                 s.chains.end());

  annotate_structure(s, ChiDefinitionTable::standard());
  return s;
}

Structure parse_pdb_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pdb(ss.str(), path.stem().string());
}

} // namespace rforge
