#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sludec/decoder.hpp"

namespace sludec {

inline constexpr int kCheckpointVersion = 1;

// Binary parameter file: 8-byte magic, u32 version, u64 header length, a JSON header naming
// every parameter and its shape, then the values as raw little-endian doubles in parameter
// order (column-major within a parameter).
struct ParamHeader {
  std::string role;  // "step1" or "step2:<slot>"
  std::string config_hash;
  std::string ontology_hash;
  std::uint64_t seed = 0;
};

void save_network(std::ostream& out, const Network<double>& net, const ParamHeader& header);
// Overwrites the parameters of a network built with the same shape; names and shapes must
// match exactly.
ParamHeader load_network(std::istream& in, Network<double>& net);

void save_table(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable load_table(std::istream& in);

// A checkpoint directory: manifest.json, ontology.json, config.txt, embeddings.bin,
// step1.bin and one step2_<slot>.bin per value model.
void save_decoder(const std::filesystem::path& dir, const Decoder& decoder);
Decoder load_decoder(const std::filesystem::path& dir);

}  // namespace sludec
