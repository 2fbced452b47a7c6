#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sludec/embeddings.hpp"
#include "sludec/sentence_encoder.hpp"

namespace sludec {

struct Hypothesis {
  std::string text;
  double score = 0;  // normalized confidence

  bool operator==(const Hypothesis&) const = default;
};

// One user turn to decode.
struct Turn {
  std::string session;
  int index = 0;
  std::vector<Hypothesis> hyps;
  std::vector<SystemTurn> system_acts;  // every system turn so far, oldest first
  std::vector<DialogueAct> reference;

  NBestList nbest() const;
  bool operator==(const Turn&) const = default;
};

struct Provenance {
  std::string source;
  std::string options;
  std::string checksum;  // FNV-1a over the canonical turn records

  bool operator==(const Provenance&) const = default;
};

struct Dataset {
  std::vector<Turn> turns;
  Provenance provenance;

  // Session ids in order of first appearance.
  std::vector<std::string> sessions() const;
  std::size_t num_dialogues() const { return sessions().size(); }
  Dataset subset(const std::vector<std::string>& sessions) const;

  bool operator==(const Dataset&) const = default;
};

enum class AsrChannel { live, batch };

struct ImportOptions {
  AsrChannel channel = AsrChannel::live;
};

// Reads DSTC2 call directories (log.json + label.json) listed by the flist files, whose
// entries are paths relative to root.
Dataset import_dstc2(const std::filesystem::path& root,
                     const std::vector<std::filesystem::path>& flists,
                     const ImportOptions& options = {});

inline constexpr int kDatasetFormatVersion = 1;

// Line-delimited JSON: a header record, then one turn per line.
void write_canonical(const Dataset& ds, std::ostream& out);
void write_canonical(const Dataset& ds, const std::filesystem::path& path);
Dataset read_canonical(std::istream& in);
Dataset read_canonical(const std::filesystem::path& path);

// Either a canonical dataset or bare turn records carrying at least "hyps".
Dataset read_turn_records(const std::filesystem::path& path);

std::string canonical_checksum(const std::vector<Turn>& turns);

// Dialogue-level split; returns (train, validation).
std::pair<Dataset, Dataset> split_validation(const Dataset& ds, double fraction, std::uint64_t seed);

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sessions;
  std::vector<int> fold_of;  // parallel to sessions

  std::vector<std::string> fold_sessions(int fold) const;
  // (train = all other folds, test = fold)
  std::pair<Dataset, Dataset> split(const Dataset& ds, int fold) const;
};

FoldPlan make_folds(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace sludec
