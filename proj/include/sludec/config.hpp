#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sludec/data.hpp"
#include "sludec/network.hpp"

namespace sludec {

// Every knob of a run. The file form is
// flat "key = value" lines with '#' comments.
struct RunConfig {
  ModelVariant variant = ModelVariant::cnn_lstm_w4;
  std::string embeddings;  // pretrained vector file; empty means random vectors
  int embed_dim = 100;
  std::vector<int> windows{3, 4, 5};
  int maps = 100;
  int hidden = 100;
  int nbest = 10;
  int batch_size = 50;
  double dropout = 0.5;
  double rho = 0.95;
  double epsilon = 1e-6;
  double validation_fraction = 0.10;
  int patience = 5;
  int max_epochs = 100;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  std::uint64_t fold_seed = 1;
  int folds = 10;
  int max_acts = 14;
  AsrChannel asr_channel = AsrChannel::live;
  bool act_only = false;  // zero every slot-presence loss in Step I

  // Throws ConfigError naming the key when it is unknown or its value is invalid.
  void set(const std::string& key, const std::string& value);
  static RunConfig parse(std::istream& in);
  static RunConfig from_file(const std::filesystem::path& path);

  // Resolved config in file form, every key present, fixed order.
  std::string to_text() const;
  std::string hash() const;
  NetworkShape shape(std::vector<int> head_sizes) const;

  static const std::vector<std::string>& keys();
  bool operator==(const RunConfig&) const = default;
};

}  // namespace sludec
