#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sludec/semantics.hpp"

namespace sludec {

// The unit of scoring: the dialogue act of a turn, or one slot-value pair. Slot-presence
// items (Step I scoring) are slot items with an empty value.
struct SemanticItem {
  enum class Kind { act, slot };
  Kind kind = Kind::act;
  std::string slot;   // act label for act items
  std::string value;

  static SemanticItem act(std::string label) { return {Kind::act, std::move(label), {}}; }
  static SemanticItem pair(std::string slot, std::string value) {
    return {Kind::slot, std::move(slot), std::move(value)};
  }
  auto operator<=>(const SemanticItem&) const = default;
  bool operator==(const SemanticItem&) const = default;
};

struct ScoredItem {
  SemanticItem item;
  double confidence = 0;
};

using ItemSet = std::vector<SemanticItem>;

struct ItemCounts {
  long tp = 0, fp = 0, fn = 0;
  bool operator==(const ItemCounts&) const = default;
};

// Micro-aggregated exact-match counts; each turn's items are treated as a set.
ItemCounts item_counts(const std::vector<ItemSet>& predicted, const std::vector<ItemSet>& reference);

struct PRF1 {
  double precision = 0, recall = 0, f1 = 0;
};

// P = 1 with no predictions, R = 1 with no references, F1 = 0 when P + R = 0.
PRF1 prf1(const ItemCounts& c);

// Per-turn output of the joint heads: act label plus one presence flag per slot.
struct HeadOutputs {
  std::string act;
  std::vector<bool> present;
};

// Mean over heads (act + each slot) of per-head accuracy across turns.
double joint_accuracy(const std::vector<HeadOutputs>& predicted,
                      const std::vector<HeadOutputs>& reference);

inline constexpr double kIceClamp = 1e-6;

// Item cross entropy, normalized by the number of reference items. Items hypothesized on
// neither side contribute nothing. Empty when there are no reference items.
std::optional<double> ice(const std::vector<std::vector<ScoredItem>>& hypothesized,
                          const std::vector<ItemSet>& reference);

enum class EvalLevel { step1, full };

ItemSet reference_items(const std::vector<DialogueAct>& acts, EvalLevel level);
std::vector<ScoredItem> frame_items(const SemanticFrame& frame, EvalLevel level);
HeadOutputs frame_heads(const SemanticFrame& frame, const std::vector<std::string>& slots);
HeadOutputs reference_heads(const std::vector<DialogueAct>& acts, const std::vector<std::string>& slots);

struct SlotReport {
  double accuracy = 0;  // value accuracy over turns whose reference has the slot
  double precision = 0, recall = 0, f1 = 0;
  std::optional<double> ice;
  ItemCounts counts;
  long reference_turns = 0;
};

struct ScoreReport {
  EvalLevel level = EvalLevel::full;
  double accuracy = 0;
  double precision = 0, recall = 0, f1 = 0;
  std::optional<double> ice;
  ItemCounts counts;
  long n_reference_items = 0;
  long n_turns = 0;
  std::map<std::string, SlotReport> per_slot;

  std::string to_text() const;
  // "metric<TAB>value" lines for machine comparison.
  std::string to_table() const;
};

// predicted[i] must describe references[i]; slots are the heads scored by joint_accuracy.
ScoreReport evaluate(const std::vector<SemanticFrame>& predicted,
                     const std::vector<std::vector<DialogueAct>>& references,
                     const std::vector<std::string>& slots, EvalLevel level);

}  // namespace sludec
