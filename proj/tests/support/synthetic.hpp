#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sludec/data.hpp"

// A small restaurant-domain corpus in the DSTC2 directory layout, for tests that cannot
// rely on the real download.
namespace synth {

struct Options {
  int dialogues = 20;
  std::uint64_t seed = 1;
  double asr_noise = 0.15;  // chance that a top hypothesis is corrupted
  int max_nbest = 4;
};

// Writes root/data/<session>/{log,label}.json and root/<name>.flist; returns the flist.
std::filesystem::path write_corpus(const std::filesystem::path& root, const std::string& name,
                                   const Options& options);

// The restaurant dialogue used throughout as a running example: four user turns, the last
// preceded by four system turns.
std::filesystem::path write_example_dialogue(const std::filesystem::path& root);

sludec::Dataset make_dataset(const Options& options);
sludec::Dataset example_dialogue();

// Fresh directory under the system temp path.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace synth
