#include "sludec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sludec/errors.hpp"

namespace sludec {

namespace {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

constexpr char kParamMagic[8] = {'S', 'L', 'U', 'D', 'E', 'C', 'P', 'T'};
constexpr char kTableMagic[8] = {'S', 'L', 'U', 'D', 'E', 'C', 'E', 'M'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(std::string("truncated ") + what);
  return v;
}

void write_container(std::ostream& out, const char (&magic)[8], const json& header) {
  const std::string text = header.dump();
  out.write(magic, 8);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json read_container(std::istream& in, const char (&magic)[8], const char* what) {
  char m[8];
  if (!in.read(m, 8) || std::memcmp(m, magic, 8) != 0)
    throw FormatError(std::string(what) + ": bad magic");
  const auto version = get<std::uint32_t>(in, what);
  if (version != kCheckpointVersion)
    throw FormatError(std::string(what) + ": version " + std::to_string(version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  const auto n = get<std::uint64_t>(in, what);
  std::string text(n, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(n))) throw FormatError(std::string("truncated ") + what);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

void write_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* p, std::size_t n, const char* what) {
  if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double))))
    throw FormatError(std::string("truncated ") + what);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  return in;
}

std::string file_stem_for(const std::string& slot) {
  std::string s = "step2_";
  for (unsigned char c : slot) s += std::isalnum(c) ? static_cast<char>(c) : '_';
  return s;
}

}  // namespace

void save_network(std::ostream& out, const Network<double>& net, const ParamHeader& header) {
  json h;
  h["role"] = header.role;
  h["config_hash"] = header.config_hash;
  h["ontology_hash"] = header.ontology_hash;
  h["seed"] = header.seed;
  h["variant"] = to_string(net.shape().variant);
  h["head_sizes"] = net.shape().head_sizes;
  json params = json::array();
  for (const auto* p : net.parameters())
    params.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  h["params"] = params;
  write_container(out, kParamMagic, h);
  for (const auto* p : net.parameters()) write_doubles(out, p->value.data(), static_cast<std::size_t>(p->value.size()));
  if (!out) throw FormatError("failed writing parameters");
}

ParamHeader load_network(std::istream& in, Network<double>& net) {
  const json h = read_container(in, kParamMagic, "parameter file");
  ParamHeader out;
  try {
    out.role = h.at("role").get<std::string>();
    out.config_hash = h.at("config_hash").get<std::string>();
    out.ontology_hash = h.at("ontology_hash").get<std::string>();
    out.seed = h.at("seed").get<std::uint64_t>();
    const auto& params = h.at("params");
    auto mine = net.parameters();
    if (params.size() != mine.size())
      throw IncompatibilityError("parameter file has " + std::to_string(params.size()) +
                                 " parameters, network has " + std::to_string(mine.size()));
    for (std::size_t i = 0; i < mine.size(); ++i) {
      const auto name = params[i].at("name").get<std::string>();
      const auto rows = params[i].at("rows").get<Eigen::Index>();
      const auto cols = params[i].at("cols").get<Eigen::Index>();
      if (name != mine[i]->name || rows != mine[i]->value.rows() || cols != mine[i]->value.cols())
        throw IncompatibilityError("parameter " + std::to_string(i) + ": file has " + name + " " +
                                   std::to_string(rows) + "x" + std::to_string(cols) + ", network has " +
                                   mine[i]->name + " " + shape_of(mine[i]->value));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("parameter file header: ") + e.what());
  }
  for (auto* p : net.parameters()) {
    read_doubles(in, p->value.data(), static_cast<std::size_t>(p->value.size()), "parameter file");
    p->zero_grad();
  }
  return out;
}

void save_table(std::ostream& out, const EmbeddingTable& table) {
  json h;
  h["dim"] = table.dim();
  h["oov_row"] = table.oov_row();
  std::vector<std::string> tokens;
  std::vector<int> trainable;
  for (int r = 0; r < table.size(); ++r) {
    tokens.push_back(table.token(r));
    trainable.push_back(table.trainable(r) ? 1 : 0);
  }
  h["tokens"] = tokens;
  h["trainable"] = trainable;
  write_container(out, kTableMagic, h);
  write_doubles(out, table.raw().data(), table.raw().size());
  if (!out) throw FormatError("failed writing embeddings");
}

EmbeddingTable load_table(std::istream& in) {
  const json h = read_container(in, kTableMagic, "embedding file");
  try {
    const int dim = h.at("dim").get<int>();
    auto tokens = h.at("tokens").get<std::vector<std::string>>();
    const auto flags = h.at("trainable").get<std::vector<int>>();
    if (flags.size() != tokens.size()) throw FormatError("embedding file: flag count mismatch");
    std::vector<bool> trainable(flags.begin(), flags.end());
    std::vector<double> data(tokens.size() * static_cast<std::size_t>(dim));
    read_doubles(in, data.data(), data.size(), "embedding file");
    return EmbeddingTable::from_raw(dim, std::move(tokens), std::move(data), std::move(trainable),
                                    h.at("oov_row").get<int>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("embedding file header: ") + e.what());
  }
}

void save_decoder(const std::filesystem::path& dir, const Decoder& decoder) {
  std::filesystem::create_directories(dir);
  const auto& ontology = decoder.ontology();
  const ParamHeader base{"", decoder.config.hash(), ontology.hash(), decoder.config.seed};

  json manifest;
  manifest["format"] = "sludec-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["config_hash"] = base.config_hash;
  manifest["ontology_hash"] = base.ontology_hash;
  json models = json::object();

  {
    auto out = open_out(dir / "ontology.json");
    out << ontology.to_json();
  }
  {
    auto out = open_out(dir / "config.txt");
    out << decoder.config.to_text();
  }
  {
    auto out = open_out(dir / "embeddings.bin");
    save_table(out, *decoder.table);
  }
  {
    auto out = open_out(dir / "step1.bin");
    auto h = base;
    h.role = "step1";
    save_network(out, decoder.step1.net, h);
  }
  for (const auto& [slot, model] : decoder.step2) {
    const auto file = file_stem_for(slot) + ".bin";
    auto out = open_out(dir / file);
    auto h = base;
    h.role = "step2:" + slot;
    save_network(out, model.net, h);
    models[slot] = file;
  }
  manifest["step2"] = models;
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

Decoder load_decoder(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("checkpoint directory not found: " + dir.string());
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
    if (manifest.at("format") != "sludec-checkpoint") throw FormatError("not a checkpoint manifest");
    if (manifest.at("version").get<int>() != kCheckpointVersion)
      throw FormatError("checkpoint version " + manifest.at("version").dump() + ", expected " +
                        std::to_string(kCheckpointVersion));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint manifest: ") + e.what());
  }
  std::istringstream cfg_text(read_file(dir / "config.txt"));
  const auto config = RunConfig::parse(cfg_text);
  const auto ontology = Ontology::from_json(read_file(dir / "ontology.json"));
  if (ontology.hash() != manifest.at("ontology_hash").get<std::string>())
    throw IncompatibilityError("checkpoint ontology does not match its manifest");

  std::shared_ptr<const EmbeddingTable> table;
  {
    auto in = open_in(dir / "embeddings.bin");
    table = std::make_shared<EmbeddingTable>(load_table(in));
  }
  auto check = [&](const ParamHeader& h, const std::string& role) {
    if (h.role != role) throw IncompatibilityError("expected " + role + " parameters, found " + h.role);
    if (h.ontology_hash != ontology.hash())
      throw IncompatibilityError(role + " was trained on a different ontology");
  };

  std::vector<int> heads{static_cast<int>(ontology.acts.size())};
  heads.insert(heads.end(), ontology.slots.size(), 2);
  Decoder dec{config, table,
              StepOneModel{ontology, Network<double>(config.shape(heads), table),
                           static_cast<std::size_t>(config.nbest)},
              {}};
  {
    auto in = open_in(dir / "step1.bin");
    check(load_network(in, dec.step1.net), "step1");
  }
  for (const auto& [slot, file] : manifest.at("step2").items()) {
    const auto vit = ontology.values.find(slot);
    if (vit == ontology.values.end()) throw IncompatibilityError("value model for unknown slot '" + slot + "'");
    SlotValueModel m{slot, vit->second,
                     Network<double>(config.shape({static_cast<int>(vit->second.size())}), table),
                     static_cast<std::size_t>(config.nbest)};
    auto in = open_in(dir / file.get<std::string>());
    check(load_network(in, m.net), "step2:" + slot);
    dec.step2.emplace(slot, std::move(m));
  }
  return dec;
}

}  // namespace sludec
