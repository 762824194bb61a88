#include "rforge/structure.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "rforge/error.hpp"

namespace rforge {

namespace {

void print_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void print_opt(std::string& out, const std::optional<double>& v) {
  if (v)
    print_double(out, *v);
  else
    out += '-';
}

double read_double(std::istringstream& in, std::size_t lineno) {
  std::string tok;
  if (!(in >> tok))
    throw ParseError("missing numeric field", lineno);
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad numeric field '" + tok + "'", lineno);
  return v;
}

std::optional<double> read_opt(std::istringstream& in, std::size_t lineno) {
  std::string tok;
  if (!(in >> tok))
    throw ParseError("missing field", lineno);
  if (tok == "-")
    return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad numeric field '" + tok + "'", lineno);
  return v;
}

} // namespace

std::string serialize_structure(const Structure& s) {
  std::string out = "rforge-structure v1\n";
  out += "id " + (s.id.empty() ? "-" : s.id) + "\n";
  out += "resolution ";
  print_opt(out, s.resolution);
  out += "\nrvalue ";
  print_opt(out, s.r_value);
  out += "\nstats " + std::to_string(s.stats.hydrogens_dropped) + " " +
         std::to_string(s.stats.hetatm_dropped) + " " +
         std::to_string(s.stats.atoms_dropped) + " " +
         std::to_string(s.stats.residues_dropped) + "\n";
  for (const Chain& c : s.chains) {
    out += "chain ";
    out += c.id;
    out += "\n";
    for (const ResidueRecord& r : c.residues) {
      out += "residue ";
      out += to_string(r.amino_acid);
      out += " " + std::to_string(r.residue_index) + " ";
      out += r.complete ? '1' : '0';
      out += " ";
      print_opt(out, r.phi);
      out += " ";
      print_opt(out, r.psi);
      out += " " + std::to_string(r.chi.size());
      for (double v : r.chi) {
        out += " ";
        print_double(out, v);
      }
      out += "\n";
      for (const AtomRecord& a : r.atoms) {
        out += "atom ";
        out += to_string(a.element);
        out += " ";
        out += to_string(a.label);
        for (int i = 0; i < 3; ++i) {
          out += " ";
          print_double(out, a.coords[i]);
        }
        out += "\n";
      }
    }
  }
  out += "end\n";
  return out;
}

Structure deserialize_structure(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() {
    if (!std::getline(in, line))
      throw ParseError("truncated structure record", lineno);
    ++lineno;
    return std::istringstream(line);
  };

  auto header = next();
  std::string magic, version;
  header >> magic >> version;
  if (magic != "rforge-structure" || version != "v1")
    throw ParseError("not a structure record", lineno);

  Structure s;
  std::string key;
  {
    auto ls = next();
    ls >> key >> s.id;
    if (key != "id")
      throw ParseError("expected id", lineno);
    if (s.id == "-")
      s.id.clear();
  }
  {
    auto ls = next();
    ls >> key;
    if (key != "resolution")
      throw ParseError("expected resolution", lineno);
    s.resolution = read_opt(ls, lineno);
  }
  {
    auto ls = next();
    ls >> key;
    if (key != "rvalue")
      throw ParseError("expected rvalue", lineno);
    s.r_value = read_opt(ls, lineno);
  }
  {
    auto ls = next();
    ls >> key >> s.stats.hydrogens_dropped >> s.stats.hetatm_dropped >>
        s.stats.atoms_dropped >> s.stats.residues_dropped;
    if (key != "stats")
      throw ParseError("expected stats", lineno);
  }

  Chain* chain = nullptr;
  ResidueRecord* residue = nullptr;
  while (true) {
    auto ls = next();
    ls >> key;
    if (key == "end")
      break;
    if (key == "chain") {
      std::string id;
      ls >> id;
      s.chains.push_back({id.empty() ? ' ' : id[0], {}});
      chain = &s.chains.back();
      residue = nullptr;
    } else if (key == "residue") {
      if (!chain)
        throw ParseError("residue before chain", lineno);
      ResidueRecord r;
      std::string aa_tok;
      int complete_flag = 0;
      ls >> aa_tok >> r.residue_index >> complete_flag;
      auto aa = amino_acid_from_code(aa_tok);
      if (!aa)
        throw ParseError("bad amino acid '" + aa_tok + "'", lineno);
      r.amino_acid = *aa;
      r.chain_id = chain->id;
      r.complete = complete_flag != 0;
      r.phi = read_opt(ls, lineno);
      r.psi = read_opt(ls, lineno);
      std::size_t n_chi = 0;
      ls >> n_chi;
      for (std::size_t i = 0; i < n_chi; ++i)
        r.chi.push_back(read_double(ls, lineno));
      chain->residues.push_back(std::move(r));
      residue = &chain->residues.back();
    } else if (key == "atom") {
      if (!residue)
        throw ParseError("atom before residue", lineno);
      std::string el_tok, label_tok;
      ls >> el_tok >> label_tok;
      auto el = element_from_symbol(el_tok);
      auto label = atom_label_from_name(label_tok);
      if (!el || !label)
        throw ParseError("bad atom field", lineno);
      AtomRecord a;
      a.element = *el;
      a.label = *label;
      a.amino_acid = residue->amino_acid;
      a.residue_index = residue->residue_index;
      a.chain_id = residue->chain_id;
      for (int i = 0; i < 3; ++i)
        a.coords[i] = read_double(ls, lineno);
      residue->atoms.push_back(a);
    } else {
      throw ParseError("unexpected record '" + key + "'", lineno);
    }
  }
  return s;
}

bool operator==(const AtomRecord& a, const AtomRecord& b) {
  return a.element == b.element && a.label == b.label &&
         a.amino_acid == b.amino_acid && a.residue_index == b.residue_index &&
         a.chain_id == b.chain_id &&
         (a.coords.array() == b.coords.array()).all();
}

bool operator==(const ResidueRecord& a, const ResidueRecord& b) {
  return a.amino_acid == b.amino_acid && a.residue_index == b.residue_index &&
         a.chain_id == b.chain_id && a.atoms == b.atoms && a.phi == b.phi &&
         a.psi == b.psi && a.chi == b.chi && a.complete == b.complete;
}

bool operator==(const Chain& a, const Chain& b) {
  return a.id == b.id && a.residues == b.residues;
}

bool operator==(const Structure& a, const Structure& b) {
  return a.id == b.id && a.resolution == b.resolution &&
         a.r_value == b.r_value && a.chains == b.chains;
}

} // namespace rforge
