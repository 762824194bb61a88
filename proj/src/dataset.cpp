#include "rforge/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rforge/error.hpp"
#include "rforge/rng.hpp"

namespace rforge {

std::string_view to_string(Split s) {
  switch (s) {
  case Split::Train: return "train";
  case Split::Validation: return "validation";
  case Split::Test: return "test";
  case Split::Excluded: return "excluded";
  }
  return "?";
}

std::optional<Split> split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  if (s == "excluded") return Split::Excluded;
  return std::nullopt;
}

std::vector<const ManifestEntry*> DatasetManifest::with_split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == s)
      out.push_back(&e);
  return out;
}

DatasetManifest filter_dataset(const std::vector<StructureMeta>& metas,
                               const std::unordered_set<std::string>& excluded,
                               const FilterOptions& opts) {
  DatasetManifest manifest;
  for (const auto& m : metas) {
    if (!m.resolution || !m.r_value) {
      ++manifest.missing_metadata;
      continue;
    }
    if (!(*m.resolution < opts.resolution_max) ||
        !(*m.r_value < opts.r_value_max))
      continue;
    ManifestEntry e;
    e.id = m.id;
    e.resolution = *m.resolution;
    e.r_value = *m.r_value;
    e.path = m.path.value_or("");
    if (excluded.contains(m.id)) {
      e.split = Split::Excluded;
    } else {
      // FNV mixes short strings poorly in the high bits; finalize with
      // splitmix64 before taking the top 53.
      std::uint64_t h = fnv1a64(opts.seed, m.id.data(), m.id.size());
      h = splitmix64(h);
      const double u = double(h >> 11) * 0x1.0p-53;
      e.split = u < opts.validation_fraction ? Split::Validation : Split::Train;
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string manifest_to_text(const DatasetManifest& m) {
  std::string out = "# id\tsplit\tresolution\trvalue\tpath\n";
  char buf[64];
  for (const auto& e : m.entries) {
    out += e.id;
    out += '\t';
    out += to_string(e.split);
    std::snprintf(buf, sizeof(buf), "\t%.17g\t%.17g\t", e.resolution,
                  e.r_value);
    out += buf;
    out += e.path;
    out += '\n';
  }
  return out;
}

DatasetManifest manifest_from_text(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::string split_tok, res_tok, r_tok;
    if (!std::getline(ls, e.id, '\t') || !std::getline(ls, split_tok, '\t') ||
        !std::getline(ls, res_tok, '\t') || !std::getline(ls, r_tok, '\t'))
      throw ParseError("bad manifest line", lineno);
    std::getline(ls, e.path, '\t');
    auto split = split_from_string(split_tok);
    if (!split)
      throw ParseError("bad split tag '" + split_tok + "'", lineno);
    e.split = *split;
    try {
      e.resolution = std::stod(res_tok);
      e.r_value = std::stod(r_tok);
    } catch (const std::exception&) {
      throw ParseError("bad numeric field", lineno);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw Error("cannot write manifest " + p.string());
  out << manifest_to_text(m);
}

DatasetManifest read_manifest(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error("cannot read manifest " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return manifest_from_text(ss.str());
}

} // namespace rforge
