#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace rforge {

enum class Split { Train, Validation, Test, Excluded };

std::string_view to_string(Split s);
std::optional<Split> split_from_string(std::string_view s);

struct StructureMeta {
  std::string id;
  std::optional<double> resolution;
  std::optional<double> r_value;
  std::optional<std::string> path; // source file, carried through when known
};

struct ManifestEntry {
  std::string id;
  Split split;
  double resolution;
  double r_value;
  std::string path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int missing_metadata = 0; // dropped with a warning count

  std::vector<const ManifestEntry*> with_split(Split s) const;
};

struct FilterOptions {
  double resolution_max = 1.8;
  double r_value_max = 0.25;
  double validation_fraction = 0.05;
  std::uint64_t seed = 0;
};

// Keeps entries passing the resolution and R-value thresholds, marks
// exclusion-listed ids Excluded, and assigns the rest to train/validation by
// a seeded hash of the identifier (deterministic, order independent).
DatasetManifest filter_dataset(const std::vector<StructureMeta>& metas,
                               const std::unordered_set<std::string>& excluded,
                               const FilterOptions& opts = {});

// Line-delimited manifest: id <TAB> split <TAB> resolution <TAB> rvalue
// [<TAB> path].
std::string manifest_to_text(const DatasetManifest& m);
DatasetManifest manifest_from_text(const std::string& text);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& p);
DatasetManifest read_manifest(const std::filesystem::path& p);

} // namespace rforge
