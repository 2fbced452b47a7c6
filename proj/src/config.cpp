#include "sludec/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sludec/semantics.hpp"

namespace sludec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "variant",    "embeddings", "embed_dim",           "windows",  "maps",       "hidden",
      "nbest",      "batch_size", "dropout",             "rho",      "epsilon",    "validation_fraction",
      "patience",   "max_epochs", "seed",                "split_seed", "fold_seed", "folds",
      "max_acts",   "asr_channel", "act_only"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "variant") {
    try {
      variant = parse_variant(value);
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'variant': " + std::string(e.what()));
    }
  } else if (key == "embeddings") {
    embeddings = value;
  } else if (key == "embed_dim") {
    embed_dim = parse_number<int>(key, value);
    require(embed_dim > 0, key, "must be positive");
  } else if (key == "windows") {
    std::vector<int> w;
    std::stringstream ss(value);
    std::string piece;
    while (std::getline(ss, piece, ',')) w.push_back(parse_number<int>(key, trim(piece)));
    require(!w.empty(), key, "needs at least one window");
    for (int l : w) require(l > 0, key, "window sizes must be positive");
    windows = w;
  } else if (key == "maps") {
    maps = parse_number<int>(key, value);
    require(maps > 0, key, "must be positive");
  } else if (key == "hidden") {
    hidden = parse_number<int>(key, value);
    require(hidden > 0, key, "must be positive");
  } else if (key == "nbest") {
    nbest = parse_number<int>(key, value);
    require(nbest > 0, key, "must be positive");
  } else if (key == "batch_size") {
    batch_size = parse_number<int>(key, value);
    require(batch_size > 0, key, "must be positive");
  } else if (key == "dropout") {
    dropout = parse_number<double>(key, value);
    require(dropout >= 0 && dropout < 1, key, "must lie in [0,1)");
  } else if (key == "rho") {
    rho = parse_number<double>(key, value);
    require(rho > 0 && rho < 1, key, "must lie in (0,1)");
  } else if (key == "epsilon") {
    epsilon = parse_number<double>(key, value);
    require(epsilon > 0, key, "must be positive");
  } else if (key == "validation_fraction") {
    validation_fraction = parse_number<double>(key, value);
    require(validation_fraction > 0 && validation_fraction < 1, key, "must lie in (0,1)");
  } else if (key == "patience") {
    patience = parse_number<int>(key, value);
    require(patience > 0, key, "must be positive");
  } else if (key == "max_epochs") {
    max_epochs = parse_number<int>(key, value);
    require(max_epochs > 0, key, "must be positive");
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "split_seed") {
    split_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "fold_seed") {
    fold_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "folds") {
    folds = parse_number<int>(key, value);
    require(folds >= 2, key, "must be at least 2");
  } else if (key == "max_acts") {
    max_acts = parse_number<int>(key, value);
    require(max_acts >= 1, key, "must be positive");
  } else if (key == "asr_channel") {
    if (value == "live")
      asr_channel = AsrChannel::live;
    else if (value == "batch")
      asr_channel = AsrChannel::batch;
    else
      throw ConfigError("config key 'asr_channel': expected live or batch, got '" + value + "'");
  } else if (key == "act_only") {
    act_only = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  std::string w;
  for (std::size_t i = 0; i < windows.size(); ++i) w += (i ? "," : "") + std::to_string(windows[i]);
  os << "variant = " << to_string(variant) << "\n"
     << "embeddings = " << embeddings << "\n"
     << "embed_dim = " << embed_dim << "\n"
     << "windows = " << w << "\n"
     << "maps = " << maps << "\n"
     << "hidden = " << hidden << "\n"
     << "nbest = " << nbest << "\n"
     << "batch_size = " << batch_size << "\n"
     << "dropout = " << fmt_double(dropout) << "\n"
     << "rho = " << fmt_double(rho) << "\n"
     << "epsilon = " << fmt_double(epsilon) << "\n"
     << "validation_fraction = " << fmt_double(validation_fraction) << "\n"
     << "patience = " << patience << "\n"
     << "max_epochs = " << max_epochs << "\n"
     << "seed = " << seed << "\n"
     << "split_seed = " << split_seed << "\n"
     << "fold_seed = " << fold_seed << "\n"
     << "folds = " << folds << "\n"
     << "max_acts = " << max_acts << "\n"
     << "asr_channel = " << (asr_channel == AsrChannel::live ? "live" : "batch") << "\n"
     << "act_only = " << (act_only ? "true" : "false") << "\n";
  return os.str();
}

std::string RunConfig::hash() const { return hex64(fnv1a(to_text())); }

NetworkShape RunConfig::shape(std::vector<int> head_sizes) const {
  NetworkShape s;
  s.embed_dim = embed_dim;
  s.windows = windows;
  s.maps = maps;
  s.hidden = hidden;
  s.variant = variant;
  s.head_sizes = std::move(head_sizes);
  return s;
}

}  // namespace sludec
