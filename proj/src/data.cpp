#include "sludec/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sludec/semantics.hpp"

namespace sludec {

using nlohmann::json;

NBestList Turn::nbest() const {
  NBestList out;
  for (const auto& h : hyps) out.push_back({tokenize(h.text, Origin::user_hypothesis), h.score});
  return out;
}

std::vector<std::string> Dataset::sessions() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& t : turns)
    if (seen.insert(t.session).second) out.push_back(t.session);
  return out;
}

Dataset Dataset::subset(const std::vector<std::string>& keep) const {
  const std::set<std::string> wanted(keep.begin(), keep.end());
  Dataset out;
  for (const auto& t : turns)
    if (wanted.count(t.session)) out.turns.push_back(t);
  out.provenance = provenance;
  out.provenance.checksum = canonical_checksum(out.turns);
  return out;
}

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

DialogueAct act_from_dstc2(const json& j) {
  DialogueAct a;
  a.act = j.at("act").get<std::string>();
  for (const auto& pair : j.at("slots")) {
    if (!pair.is_array() || pair.size() != 2) throw ImportError("slot entry is not a pair");
    a.slots.emplace_back(scalar_text(pair[0]), scalar_text(pair[1]));
  }
  return a;
}

json acts_to_json(const std::vector<DialogueAct>& acts) {
  json arr = json::array();
  for (const auto& a : acts) {
    json slots = json::array();
    for (const auto& [s, v] : a.slots) slots.push_back(json::array({s, v}));
    arr.push_back({{"act", a.act}, {"slots", slots}});
  }
  return arr;
}

std::vector<DialogueAct> acts_from_json(const json& arr) {
  std::vector<DialogueAct> out;
  for (const auto& j : arr) {
    DialogueAct a;
    a.act = j.at("act").get<std::string>();
    for (const auto& pair : j.at("slots")) {
      if (!pair.is_array() || pair.size() != 2) throw FormatError("slot entry is not a pair");
      a.slots.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
    out.push_back(std::move(a));
  }
  return out;
}

json turn_to_json(const Turn& t) {
  json hyps = json::array();
  for (const auto& h : t.hyps) hyps.push_back({{"text", h.text}, {"score", h.score}});
  json sys = json::array();
  for (const auto& st : t.system_acts) sys.push_back(acts_to_json(st));
  return {{"session", t.session},
          {"index", t.index},
          {"hyps", hyps},
          {"system_acts", sys},
          {"reference", acts_to_json(t.reference)}};
}

Turn turn_from_json(const json& j, bool lenient, std::size_t lineno) {
  Turn t;
  if (lenient) {
    t.session = j.value("session", std::string("input"));
    t.index = j.value("index", static_cast<int>(lineno) - 1);
  } else {
    t.session = j.at("session").get<std::string>();
    t.index = j.at("index").get<int>();
  }
  for (const auto& h : j.at("hyps")) t.hyps.push_back({h.at("text").get<std::string>(), h.at("score").get<double>()});
  if (j.contains("system_acts"))
    for (const auto& st : j.at("system_acts")) t.system_acts.push_back(acts_from_json(st));
  else if (!lenient)
    throw FormatError("turn record lacks system_acts");
  if (j.contains("reference"))
    t.reference = acts_from_json(j.at("reference"));
  else if (!lenient)
    throw FormatError("turn record lacks reference");
  if (t.hyps.empty()) t.hyps.push_back({"", 1.0});
  if (lenient) {
    std::vector<double> raw;
    for (const auto& h : t.hyps) raw.push_back(h.score);
    const auto p = normalize_confidences(raw);
    for (std::size_t i = 0; i < p.size(); ++i) t.hyps[i].score = p[i];
  }
  return t;
}

json read_json_file(const std::filesystem::path& p, const std::string& call) {
  std::ifstream in(p);
  if (!in) throw ImportError("call " + call + ": missing file " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ImportError("call " + call + ": malformed JSON in " + p.string() + ": " + e.what());
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void check_unique_turns(const std::vector<Turn>& turns) {
  std::set<std::pair<std::string, int>> seen;
  for (const auto& t : turns)
    if (!seen.emplace(t.session, t.index).second)
      throw FormatError("duplicate turn (" + t.session + ", " + std::to_string(t.index) + ")");
}

}  // namespace

Dataset import_dstc2(const std::filesystem::path& root,
                     const std::vector<std::filesystem::path>& flists,
                     const ImportOptions& options) {
  const std::string channel = options.channel == AsrChannel::live ? "live" : "batch";
  Dataset ds;
  std::ostringstream source;
  for (const auto& flist : flists) {
    std::ifstream in(flist);
    if (!in) throw ImportError("cannot open flist " + flist.string());
    source << (source.tellp() > 0 ? "," : "") << flist.filename().string();
    std::string line;
    while (std::getline(in, line)) {
      const std::string call = trim(line);
      if (call.empty()) continue;
      const auto dir = root / call;
      const json log = read_json_file(dir / "log.json", call);
      const json label = read_json_file(dir / "label.json", call);

      std::string session;
      try {
        session = log.at("session-id").get<std::string>();
      } catch (const json::exception&) {
        throw ImportError("call " + call + ": log.json lacks session-id");
      }
      const auto& log_turns = log.at("turns");
      const auto& label_turns = label.at("turns");
      if (log_turns.size() != label_turns.size())
        throw ImportError("session " + session + ": " + std::to_string(log_turns.size()) +
                          " log turns but " + std::to_string(label_turns.size()) + " label turns");

      std::vector<SystemTurn> history;
      for (std::size_t i = 0; i < log_turns.size(); ++i) {
        const int index = static_cast<int>(i);
        try {
          const auto& lt = log_turns[i];
          const auto& bt = label_turns[i];
          if (lt.at("turn-index").get<int>() != index || bt.at("turn-index").get<int>() != index)
            throw ImportError("turn-index out of sequence");

          SystemTurn sys;
          for (const auto& a : lt.at("output").at("dialog-acts")) sys.push_back(act_from_dstc2(a));
          history.push_back(std::move(sys));

          Turn t;
          t.session = session;
          t.index = index;
          t.system_acts = history;
          std::vector<double> raw;
          for (const auto& h : lt.at("input").at(channel).at("asr-hyps")) {
            t.hyps.push_back({h.at("asr-hyp").get<std::string>(), 0.0});
            raw.push_back(h.at("score").get<double>());
          }
          if (t.hyps.empty()) {
            t.hyps.push_back({"", 1.0});
          } else {
            const auto p = normalize_confidences(raw);
            for (std::size_t j = 0; j < p.size(); ++j) t.hyps[j].score = p[j];
          }
          for (const auto& a : bt.at("semantics").at("json")) t.reference.push_back(act_from_dstc2(a));
          ds.turns.push_back(std::move(t));
        } catch (const ImportError& e) {
          throw ImportError("session " + session + ", turn " + std::to_string(index) + ": " + e.what());
        } catch (const std::exception& e) {
          throw ImportError("session " + session + ", turn " + std::to_string(index) +
                            ": malformed record: " + e.what());
        }
      }
    }
  }
  check_unique_turns(ds.turns);
  ds.provenance.source = "dstc2:" + source.str();
  ds.provenance.options = "channel=" + channel;
  ds.provenance.checksum = canonical_checksum(ds.turns);
  return ds;
}

std::string canonical_checksum(const std::vector<Turn>& turns) {
  std::uint64_t h = fnv1a("");
  for (const auto& t : turns) {
    h = fnv1a(turn_to_json(t).dump(), h);
    h = fnv1a("\n", h);
  }
  return hex64(h);
}

void write_canonical(const Dataset& ds, std::ostream& out) {
  const json header = {{"format", "sludec-dataset"},
                       {"version", kDatasetFormatVersion},
                       {"source", ds.provenance.source},
                       {"options", ds.provenance.options},
                       {"checksum", canonical_checksum(ds.turns)},
                       {"turns", ds.turns.size()}};
  out << header.dump() << '\n';
  for (const auto& t : ds.turns) out << turn_to_json(t).dump() << '\n';
}

void write_canonical(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_canonical(ds, out);
}

Dataset read_canonical(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty dataset file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset header: ") + e.what(), 1);
  }
  if (header.value("format", "") != "sludec-dataset") throw FormatError("not a sludec dataset file");
  if (header.value("version", -1) != kDatasetFormatVersion)
    throw FormatError("dataset format version " + std::to_string(header.value("version", -1)) +
                      " unsupported (expected " + std::to_string(kDatasetFormatVersion) + ")");
  Dataset ds;
  ds.provenance.source = header.value("source", "");
  ds.provenance.options = header.value("options", "");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      ds.turns.push_back(turn_from_json(json::parse(line), false, lineno));
    } catch (const json::exception& e) {
      throw ParseError(std::string("turn record: ") + e.what(), lineno);
    }
  }
  check_unique_turns(ds.turns);
  ds.provenance.checksum = canonical_checksum(ds.turns);
  const std::string declared = header.value("checksum", "");
  if (!declared.empty() && declared != ds.provenance.checksum)
    throw FormatError("dataset checksum mismatch (header " + declared + ", content " +
                      ds.provenance.checksum + ")");
  return ds;
}

Dataset read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  return read_canonical(in);
}

Dataset read_turn_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string first;
  while (std::getline(in, first) && trim(first).empty()) {
  }
  json j;
  try {
    j = json::parse(first);
  } catch (const json::exception& e) {
    throw ParseError(std::string("turn input: ") + e.what(), 1);
  }
  in.clear();
  in.seekg(0);
  if (j.contains("format")) return read_canonical(in);

  Dataset ds;
  ds.provenance.source = "records:" + path.filename().string();
  std::string line;
  std::size_t lineno = 0, record = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++record;
    try {
      ds.turns.push_back(turn_from_json(json::parse(line), true, record));
    } catch (const json::exception& e) {
      throw ParseError(std::string("turn record: ") + e.what(), lineno);
    }
  }
  check_unique_turns(ds.turns);
  ds.provenance.checksum = canonical_checksum(ds.turns);
  return ds;
}

std::pair<Dataset, Dataset> split_validation(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("validation fraction must lie in (0,1)");
  auto sessions = ds.sessions();
  if (sessions.size() < 2) throw DomainError("validation split needs at least two dialogues");
  std::mt19937_64 rng(seed);
  std::shuffle(sessions.begin(), sessions.end(), rng);
  auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(sessions.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, sessions.size() - 1);
  const std::vector<std::string> val(sessions.begin(), sessions.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::string> train(sessions.begin() + static_cast<std::ptrdiff_t>(n_val), sessions.end());
  return {ds.subset(train), ds.subset(val)};
}

FoldPlan make_folds(const Dataset& ds, int k, std::uint64_t seed) {
  auto sessions = ds.sessions();
  if (k < 2 || static_cast<std::size_t>(k) > sessions.size())
    throw DomainError("cannot make " + std::to_string(k) + " folds from " +
                      std::to_string(sessions.size()) + " dialogues");
  std::mt19937_64 rng(seed);
  std::shuffle(sessions.begin(), sessions.end(), rng);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.sessions = sessions;
  for (std::size_t i = 0; i < sessions.size(); ++i) plan.fold_of.push_back(static_cast<int>(i % k));
  return plan;
}

std::vector<std::string> FoldPlan::fold_sessions(int fold) const {
  if (fold < 0 || fold >= k) throw DomainError("fold index out of range");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    if (fold_of[i] == fold) out.push_back(sessions[i]);
  return out;
}

std::pair<Dataset, Dataset> FoldPlan::split(const Dataset& ds, int fold) const {
  const auto test = fold_sessions(fold);
  std::vector<std::string> train;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    if (fold_of[i] != fold) train.push_back(sessions[i]);
  return {ds.subset(train), ds.subset(test)};
}

}  // namespace sludec
