#include "rforge/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rforge/error.hpp"

namespace rforge {

namespace {

constexpr char kMagic[8] = {'R', 'F', 'G', 'C', 'K', 'P', 'T', '1'};

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"layers", c.layers},       {"width", c.width},
          {"heads", c.heads},         {"ff_width", c.ff_width},
          {"cat_embed", c.cat_embed}, {"coord_proj", c.coord_proj},
          {"mlp_hidden", c.mlp_hidden}, {"k", c.k}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.layers = j.at("layers");
  c.width = j.at("width");
  c.heads = j.at("heads");
  c.ff_width = j.at("ff_width");
  c.cat_embed = j.at("cat_embed");
  c.coord_proj = j.at("coord_proj");
  c.mlp_hidden = j.at("mlp_hidden");
  c.k = j.at("k");
  return c;
}

nlohmann::json read_header(std::ifstream& in, const std::filesystem::path& p) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ParseError(p.string() + " is not a checkpoint file");
  std::uint32_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), 4);
  if (!in || header_len == 0 || header_len > (1u << 24))
    throw ParseError(p.string() + ": bad checkpoint header length");
  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in)
    throw ParseError(p.string() + ": truncated checkpoint header");
  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded() || j.value("format", 0) != 1)
    throw ParseError(p.string() + ": unsupported checkpoint format");
  return j;
}

} // namespace

void save_checkpoint(EnergyModel& model, const std::filesystem::path& path) {
  const auto tensors = model.tensors();
  nlohmann::json header = {
      {"format", 1},
      {"architecture", model.architecture()},
      {"config", config_to_json(model.config())},
      {"tensors", nlohmann::json::array()},
  };
  for (const auto& t : tensors)
    header["tensors"].push_back({{"name", t.name},
                                 {"rows", t.tensor->rows()},
                                 {"cols", t.tensor->cols()}});
  const std::string header_str = header.dump();

  const auto tmp =
      path.string() + ".tmp." +
      std::to_string(std::random_device{}() % 1000000);
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw Error("cannot write checkpoint " + path.string());
    out.write(kMagic, 8);
    const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(header_str.data(), header_str.size());
    for (const auto& t : tensors)
      out.write(reinterpret_cast<const char*>(t.tensor->data()),
                static_cast<std::streamsize>(sizeof(double) *
                                             t.tensor->size()));
    if (!out)
      throw Error("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<EnergyModel>
load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open checkpoint " + path.string());
  const nlohmann::json header = read_header(in, path);
  const ModelConfig config = config_from_json(header.at("config"));
  const std::string arch = header.at("architecture");

  std::unique_ptr<EnergyModel> model;
  if (arch == "atom_transformer")
    model = std::make_unique<AtomTransformer>(config, 0);
  else if (arch == "fully_connected")
    model = std::make_unique<FcModel>(config, 0);
  else
    throw ParseError(path.string() + ": unknown architecture '" + arch + "'");

  auto tensors = model->tensors();
  const auto& tensor_list = header.at("tensors");
  if (tensor_list.size() != tensors.size())
    throw ParseError(path.string() + ": tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& meta = tensor_list[i];
    if (meta.at("name") != tensors[i].name ||
        meta.at("rows") != tensors[i].tensor->rows() ||
        meta.at("cols") != tensors[i].tensor->cols())
      throw ParseError(path.string() + ": tensor layout mismatch at '" +
                       tensors[i].name + "'");
    in.read(reinterpret_cast<char*>(tensors[i].tensor->data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         tensors[i].tensor->size()));
    if (!in)
      throw ParseError(path.string() + ": truncated tensor data");
  }
  return model;
}

std::string describe_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open checkpoint " + path.string());
  const nlohmann::json header = read_header(in, path);
  std::size_t params = 0;
  for (const auto& t : header.at("tensors"))
    params += static_cast<std::size_t>(t.at("rows").get<std::int64_t>() *
                                       t.at("cols").get<std::int64_t>());
  std::ostringstream out;
  out << "architecture: " << header.at("architecture").get<std::string>()
      << "\n";
  out << "config: " << header.at("config").dump() << "\n";
  out << "tensors: " << header.at("tensors").size() << "\n";
  out << "parameters: " << params << "\n";
  return out.str();
}

} // namespace rforge
