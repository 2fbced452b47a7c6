#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sludec/nn/core.hpp"

namespace sludec {

enum class Origin { user_hypothesis, system_act };

struct TokenSequence {
  std::vector<std::string> tokens;
  Origin origin = Origin::user_hypothesis;

  bool operator==(const TokenSequence&) const = default;
};

using SlotValue = std::pair<std::string, std::string>;

// One dialogue act, e.g. inform(area=north, pricerange=moderate).
struct DialogueAct {
  std::string act;
  std::vector<SlotValue> slots;

  bool operator==(const DialogueAct&) const = default;
};

// All acts the system produced in one turn, e.g. offer(name=meghna),inform(area=north).
using SystemTurn = std::vector<DialogueAct>;

// Lowercases ASCII letters and splits on whitespace.
TokenSequence tokenize(std::string_view text, Origin origin);

// [act, slot1, value1 tokens..., slot2, value2 tokens...]
TokenSequence encode_system_act(const DialogueAct& act);
TokenSequence encode_system_turn(const SystemTurn& turn);

// Token -> k-dimensional vector map. Rows are dense 0..V-1; one extra row serves every
// out-of-vocabulary token. Rows are immutable once added; a row's trainable flag says
// whether models may keep a tuned copy of it for system-act lookups.
class EmbeddingTable {
 public:
  struct Lookup {
    RowMatrixD vectors;       // m x k
    std::vector<int> rows;    // table row per token
    std::vector<bool> trainable;
  };

  explicit EmbeddingTable(int dim, std::uint64_t oov_seed = 1);

  // Text vectors: one token followed by k reals per line. All rows start frozen and
  // duplicate tokens keep their first occurrence. When expected_dim is given, a line with
  // a different arity is a ParseError; otherwise the first line fixes k and later
  // disagreements are a FormatError.
  static EmbeddingTable load(const std::filesystem::path& path,
                             std::optional<int> expected_dim = std::nullopt,
                             std::uint64_t oov_seed = 1);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(tokens_.size()); }  // includes the OOV row
  int vocab_size() const { return size() - 1; }
  int oov_row() const { return oov_row_; }

  std::optional<int> find(const std::string& token) const;
  int row_of(const std::string& token) const;  // OOV row when absent
  const std::string& token(int row) const { return tokens_.at(row); }

  Eigen::Map<const VectorD> row(int r) const {
    return Eigen::Map<const VectorD>(data_.data() + static_cast<std::size_t>(r) * dim_, dim_);
  }

  // Returns the new row index; the token must not exist yet.
  int add_row(const std::string& token, const Eigen::Ref<const VectorD>& v, bool trainable);
  template <typename Rng>
  int add_random_row(const std::string& token, Rng& rng, bool trainable) {
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    VectorD v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = u(rng);
    return add_row(token, v, trainable);
  }

  bool trainable(int r) const { return trainable_.at(r); }
  void set_trainable(int r, bool on) { trainable_.at(r) = on; }
  std::vector<int> trainable_rows() const;

  // One row per token; trainable is reported only for system-act origin.
  Lookup lookup(const TokenSequence& seq) const;

  const std::vector<double>& raw() const { return data_; }
  static EmbeddingTable from_raw(int dim, std::vector<std::string> tokens, std::vector<double> data,
                                 std::vector<bool> trainable, int oov_row);

  bool operator==(const EmbeddingTable&) const;

 private:
  EmbeddingTable() = default;

  int dim_ = 0;
  int oov_row_ = -1;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> data_;
  std::vector<bool> trainable_;
};

inline constexpr const char* kOovToken = "<oov>";

// Extends a pretrained table for training: every token reached from system acts becomes
// trainable, and system-act tokens missing from the table get fresh random rows.
template <typename Rng>
void prepare_for_training(EmbeddingTable& table, const std::vector<std::string>& system_act_vocab,
                          Rng& rng) {
  table.set_trainable(table.oov_row(), true);
  for (const auto& tok : system_act_vocab) {
    if (auto r = table.find(tok))
      table.set_trainable(*r, true);
    else
      table.add_random_row(tok, rng, true);
  }
}

}  // namespace sludec
