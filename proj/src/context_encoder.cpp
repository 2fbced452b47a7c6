#include "sludec/context_encoder.hpp"

namespace sludec {

std::string to_string(ContextMode mode) {
  switch (mode) {
    case ContextMode::none: return "none";
    case ContextMode::last_1: return "last_1";
    case ContextMode::last_4: return "last_4";
    case ContextMode::all: return "all";
  }
  return "?";
}

std::string to_string(CombineMode mode) {
  switch (mode) {
    case CombineMode::identity: return "identity";
    case CombineMode::tanh: return "tanh";
    case CombineMode::lstm_input: return "lstm_input";
  }
  return "?";
}

std::vector<SystemTurn> select_context(const std::vector<SystemTurn>& history, ContextMode mode) {
  std::size_t keep = 0;
  switch (mode) {
    case ContextMode::none: keep = 0; break;
    case ContextMode::last_1: keep = 1; break;
    case ContextMode::last_4: keep = 4; break;
    case ContextMode::all: keep = history.size(); break;
  }
  keep = std::min(keep, history.size());
  return {history.end() - static_cast<std::ptrdiff_t>(keep), history.end()};
}

TokenSequence context_tokens(const std::vector<SystemTurn>& selected) {
  TokenSequence seq{{}, Origin::system_act};
  for (const auto& turn : selected) {
    auto part = encode_system_turn(turn);
    seq.tokens.insert(seq.tokens.end(), part.tokens.begin(), part.tokens.end());
  }
  return seq;
}

}  // namespace sludec
