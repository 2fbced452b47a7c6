#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sludec/embeddings.hpp"

namespace sludec {

// Sorted, de-duplicated act names joined by '+'; "null" when there are none.
std::string act_pattern(const std::vector<DialogueAct>& acts);
std::vector<std::string> split_pattern(const std::string& pattern);

// Slot-value pairs across all acts, first occurrence kept, act order preserved.
std::vector<SlotValue> reference_pairs(const std::vector<DialogueAct>& acts);

struct FrameSlot {
  std::string slot;
  std::string value;
  double presence = 0;    // P(present)
  double confidence = 0;  // P(present) * P(value | slot)

  bool operator==(const FrameSlot&) const = default;
};

// Decoder output for one turn.
struct SemanticFrame {
  std::string session;
  int index = 0;
  std::string act;
  double act_confidence = 0;
  std::vector<FrameSlot> slots;

  bool operator==(const SemanticFrame&) const = default;
};

// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace sludec
