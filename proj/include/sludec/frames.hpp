#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sludec/semantics.hpp"

namespace sludec {

inline constexpr int kFramesFormatVersion = 1;

struct FramesHeader {
  std::string config_hash;
  std::string ontology_hash;
  std::string dataset_checksum;
  std::vector<std::string> slots;

  bool operator==(const FramesHeader&) const = default;
};

struct FramesFile {
  FramesHeader header;
  std::vector<SemanticFrame> frames;
};

// Line-delimited JSON: a header record, then one frame per line.
void write_frames(std::ostream& out, const FramesFile& file);
void write_frames(const std::filesystem::path& path, const FramesFile& file);
FramesFile read_frames(std::istream& in);
FramesFile read_frames(const std::filesystem::path& path);

std::string frame_to_json(const SemanticFrame& frame);

}  // namespace sludec
