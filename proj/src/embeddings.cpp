#include "sludec/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <random>

namespace sludec {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

TokenSequence tokenize(std::string_view text, Origin origin) {
  TokenSequence seq{{}, origin};
  for (auto piece : split_ws(text)) {
    std::string tok(piece);
    for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    seq.tokens.push_back(std::move(tok));
  }
  return seq;
}

TokenSequence encode_system_act(const DialogueAct& act) {
  TokenSequence seq = tokenize(act.act, Origin::system_act);
  for (const auto& [slot, value] : act.slots) {
    auto s = tokenize(slot, Origin::system_act);
    auto v = tokenize(value, Origin::system_act);
    seq.tokens.insert(seq.tokens.end(), s.tokens.begin(), s.tokens.end());
    seq.tokens.insert(seq.tokens.end(), v.tokens.begin(), v.tokens.end());
  }
  return seq;
}

TokenSequence encode_system_turn(const SystemTurn& turn) {
  TokenSequence seq{{}, Origin::system_act};
  for (const auto& act : turn) {
    auto part = encode_system_act(act);
    seq.tokens.insert(seq.tokens.end(), part.tokens.begin(), part.tokens.end());
  }
  return seq;
}

EmbeddingTable::EmbeddingTable(int dim, std::uint64_t oov_seed) : dim_(dim) {
  if (dim <= 0) throw DomainError("embedding dimension must be positive");
  std::mt19937_64 rng(oov_seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  oov_row_ = 0;
  tokens_.push_back(kOovToken);
  for (int i = 0; i < dim_; ++i) data_.push_back(u(rng));
  trainable_.push_back(false);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path,
                                    std::optional<int> expected_dim, std::uint64_t oov_seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file " + path.string());

  std::optional<EmbeddingTable> table;
  if (expected_dim) table.emplace(*expected_dim, oov_seed);

  std::string line;
  std::size_t lineno = 0;
  VectorD v;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    const int arity = static_cast<int>(fields.size()) - 1;
    if (!table) {
      if (arity <= 0) throw ParseError("embedding line has no values", lineno);
      table.emplace(arity, oov_seed);
    }
    if (arity != table->dim()) {
      const std::string msg = "expected " + std::to_string(table->dim()) + " values for token '" +
                              std::string(fields[0]) + "', found " + std::to_string(arity);
      if (expected_dim) throw ParseError(msg, lineno);
      throw FormatError("inconsistent embedding dimension at line " + std::to_string(lineno) + ": " +
                        msg);
    }
    v.resize(arity);
    for (int i = 0; i < arity; ++i) {
      const auto f = fields[i + 1];
      double x = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(x))
        throw ParseError("unparseable real '" + std::string(f) + "'", lineno);
      v(i) = x;
    }
    std::string tok(fields[0]);
    if (table->find(tok)) {
      std::clog << "warning: " << path.string() << ":" << lineno << ": duplicate token '" << tok
                << "' ignored\n";
      continue;
    }
    table->add_row(tok, v, false);
  }
  if (!table) throw FormatError("embedding file " + path.string() + " is empty");
  return std::move(*table);
}

std::optional<int> EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int EmbeddingTable::row_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? oov_row_ : it->second;
}

int EmbeddingTable::add_row(const std::string& token, const Eigen::Ref<const VectorD>& v,
                            bool trainable) {
  if (v.size() != dim_)
    throw DimensionError("embedding row for '" + token + "' has " + std::to_string(v.size()) +
                         " values, table has k=" + std::to_string(dim_));
  if (token.empty()) throw DomainError("empty embedding token");
  if (index_.count(token)) throw DomainError("token '" + token + "' already in table");
  const int r = size();
  tokens_.push_back(token);
  index_.emplace(token, r);
  data_.insert(data_.end(), v.data(), v.data() + dim_);
  trainable_.push_back(trainable);
  return r;
}

std::vector<int> EmbeddingTable::trainable_rows() const {
  std::vector<int> rows;
  for (int r = 0; r < size(); ++r)
    if (trainable_[r]) rows.push_back(r);
  return rows;
}

EmbeddingTable::Lookup EmbeddingTable::lookup(const TokenSequence& seq) const {
  Lookup out;
  const auto m = static_cast<Eigen::Index>(seq.tokens.size());
  out.vectors.resize(m, dim_);
  out.rows.reserve(m);
  out.trainable.reserve(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int r = row_of(seq.tokens[i]);
    out.vectors.row(i) = row(r).transpose();
    out.rows.push_back(r);
    out.trainable.push_back(seq.origin == Origin::system_act && trainable_[r]);
  }
  return out;
}

EmbeddingTable EmbeddingTable::from_raw(int dim, std::vector<std::string> tokens,
                                        std::vector<double> data, std::vector<bool> trainable,
                                        int oov_row) {
  if (dim <= 0 || data.size() != tokens.size() * static_cast<std::size_t>(dim) ||
      trainable.size() != tokens.size() || oov_row < 0 ||
      oov_row >= static_cast<int>(tokens.size()))
    throw FormatError("inconsistent embedding table payload");
  EmbeddingTable t;
  t.dim_ = dim;
  t.oov_row_ = oov_row;
  t.tokens_ = std::move(tokens);
  t.data_ = std::move(data);
  t.trainable_ = std::move(trainable);
  for (int r = 0; r < t.size(); ++r) {
    if (r == oov_row) continue;
    if (!t.index_.emplace(t.tokens_[r], r).second)
      throw FormatError("duplicate token '" + t.tokens_[r] + "' in embedding table");
  }
  return t;
}

bool EmbeddingTable::operator==(const EmbeddingTable& o) const {
  return dim_ == o.dim_ && oov_row_ == o.oov_row_ && tokens_ == o.tokens_ && data_ == o.data_ &&
         trainable_ == o.trainable_;
}

}  // namespace sludec
