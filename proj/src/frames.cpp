#include "sludec/frames.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "sludec/errors.hpp"

namespace sludec {

namespace {

using json = nlohmann::json;

json frame_json(const SemanticFrame& f) {
  json slots = json::array();
  for (const auto& s : f.slots)
    slots.push_back({{"slot", s.slot}, {"value", s.value}, {"presence", s.presence}, {"confidence", s.confidence}});
  return {{"session", f.session}, {"index", f.index}, {"act", f.act}, {"confidence", f.act_confidence},
          {"slots", slots}};
}

SemanticFrame parse_frame(const json& j) {
  SemanticFrame f;
  f.session = j.at("session").get<std::string>();
  f.index = j.at("index").get<int>();
  f.act = j.at("act").get<std::string>();
  f.act_confidence = j.at("confidence").get<double>();
  for (const auto& s : j.at("slots")) {
    FrameSlot fs;
    fs.slot = s.at("slot").get<std::string>();
    fs.value = s.at("value").get<std::string>();
    fs.confidence = s.at("confidence").get<double>();
    fs.presence = s.contains("presence") ? s.at("presence").get<double>() : fs.confidence;
    for (const auto& prev : f.slots)
      if (prev.slot == fs.slot && prev.value == fs.value)
        throw FormatError("frame lists " + fs.slot + "=" + fs.value + " twice");
    f.slots.push_back(std::move(fs));
  }
  return f;
}

}  // namespace

std::string frame_to_json(const SemanticFrame& frame) { return frame_json(frame).dump(); }

void write_frames(std::ostream& out, const FramesFile& file) {
  json h{{"format", "sludec-frames"},
         {"version", kFramesFormatVersion},
         {"config_hash", file.header.config_hash},
         {"ontology_hash", file.header.ontology_hash},
         {"dataset_checksum", file.header.dataset_checksum},
         {"slots", file.header.slots},
         {"frames", file.frames.size()}};
  out << h.dump() << "\n";
  for (const auto& f : file.frames) out << frame_json(f).dump() << "\n";
  if (!out) throw FormatError("failed writing frames");
}

void write_frames(const std::filesystem::path& path, const FramesFile& file) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_frames(out, file);
}

FramesFile read_frames(std::istream& in) {
  FramesFile file;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (!have_header) {
        if (j.value("format", "") != "sludec-frames") throw FormatError("not a frames file");
        if (j.at("version").get<int>() != kFramesFormatVersion)
          throw FormatError("frames version " + j.at("version").dump() + ", expected " +
                            std::to_string(kFramesFormatVersion));
        file.header.config_hash = j.at("config_hash").get<std::string>();
        file.header.ontology_hash = j.at("ontology_hash").get<std::string>();
        file.header.dataset_checksum = j.at("dataset_checksum").get<std::string>();
        file.header.slots = j.at("slots").get<std::vector<std::string>>();
        expected = j.at("frames").get<std::size_t>();
        have_header = true;
        continue;
      }
      file.frames.push_back(parse_frame(j));
    } catch (const json::exception& e) {
      throw ParseError(std::string("frames: ") + e.what(), lineno);
    }
  }
  if (!have_header) throw FormatError("frames: missing header");
  if (file.frames.size() != expected)
    throw FormatError("frames: header announces " + std::to_string(expected) + " frames, found " +
                      std::to_string(file.frames.size()));
  return file;
}

FramesFile read_frames(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_frames(in);
}

}  // namespace sludec
