#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sludec/config.hpp"
#include "sludec/data.hpp"
#include "sludec/metrics.hpp"
#include "sludec/network.hpp"
#include "sludec/semantics.hpp"

namespace sludec {

// Act names in the order used to reduce a rare multi-act pattern to one of its acts.
const std::vector<std::string>& act_priority();

// Act, slot and value inventories derived from training annotations.
struct Ontology {
  std::vector<std::string> acts;   // act patterns, most frequent first
  std::vector<std::string> slots;  // sorted
  std::map<std::string, std::vector<std::string>> values;  // sorted per slot

  static Ontology build(const Dataset& train, std::size_t max_acts = 14);

  // Class index of a reference turn's act pattern; rare patterns are mapped.
  int act_label(const std::vector<DialogueAct>& acts) const;
  int map_pattern(const std::string& pattern) const;
  int slot_index(const std::string& slot) const;
  int value_index(const std::string& slot, const std::string& value) const;

  std::string to_json() const;
  static Ontology from_json(const std::string& text);
  std::string hash() const;

  bool operator==(const Ontology&) const = default;
};

// Turns outside the ontology: the reference uses an act pattern, slot or value never seen
// in training. They are kept in the data and can only count as misses.
std::vector<std::size_t> flag_unknown(const Dataset& ds, const Ontology& ontology);

NetworkInput featurize(const Turn& turn, const EmbeddingTable& table, ContextMode mode,
                       std::size_t nbest);

struct Example {
  NetworkInput input;
  std::vector<int> targets;
};

// [act, presence(slot_0), ..., presence(slot_{S-1})]
std::vector<int> step1_targets(const Turn& turn, const Ontology& ontology);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;  // mean per example
  std::optional<double> validation;
};

struct TrainingLog {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  std::optional<double> best_validation;
};

struct TrainOptions {
  int batch_size = 50;
  int max_epochs = 100;
  int patience = 5;
  double dropout = 0.5;
  double rho = 0.95;
  double epsilon = 1e-6;
  std::uint64_t seed = 1;
  std::vector<double> head_weights;  // empty: all ones

  static TrainOptions from(const RunConfig& c);
};

using Validator = std::function<double(const Network<double>&)>;
// Return true to stop after this epoch.
using EpochHook = std::function<bool(const EpochStats&, const Network<double>&)>;

// Shuffled mini-batches, mean gradient per batch, Adadelta. With a validator the network is
// left at its best validation epoch, with early stopping after `patience` epochs without
// improvement.
TrainingLog train_network(Network<double>& net, const std::vector<Example>& examples,
                          const TrainOptions& options, const Validator& validate = {},
                          const EpochHook& hook = {});

struct JointPrediction {
  VectorD act_probs;
  std::vector<double> presence;  // P(present) per ontology slot
  int act = 0;
};

// Step I: act distribution and per-slot presence from one shared h-hat.
struct StepOneModel {
  Ontology ontology;
  Network<double> net;
  std::size_t nbest = 10;

  JointPrediction predict(const Turn& turn) const;
  SemanticFrame frame(const Turn& turn) const;  // act + detected slots, values empty
};

// Step II: value distribution for one slot.
struct SlotValueModel {
  std::string slot;
  std::vector<std::string> values;
  Network<double> net;
  std::size_t nbest = 10;

  VectorD predict(const Turn& turn) const;
};

JointPrediction predict_joint(const Network<double>& net, const NetworkInput& input);
VectorD predict_value(const Turn& turn, const std::string& slot,
                      const std::map<std::string, SlotValueModel>& models);

// Act from Step I; every slot with P(present) > 0.5 gets its argmax value. Item confidence
// is P(act) for the act and P(present) * P(value | slot) for slot-value pairs.
SemanticFrame decode_turn(const Turn& turn, const StepOneModel& step1,
                          const std::map<std::string, SlotValueModel>& step2);

// Loads pretrained vectors (or starts empty with random rows) and extends the table for the
// training data: system-act tokens become trainable, and in random mode every hypothesis
// token seen in training gets a frozen random row.
std::shared_ptr<EmbeddingTable> build_table(const RunConfig& config, const Dataset& train);

StepOneModel train_step1(const Dataset& train, const Ontology& ontology,
                         std::shared_ptr<const EmbeddingTable> table, const RunConfig& config,
                         TrainingLog* log = nullptr);

// Empty when the slot has fewer than two values; presence from Step I then suffices.
std::optional<SlotValueModel> train_step2(const Dataset& train, const Ontology& ontology,
                                          const std::string& slot,
                                          std::shared_ptr<const EmbeddingTable> table,
                                          const RunConfig& config, TrainingLog* log = nullptr);

struct Decoder {
  RunConfig config;
  std::shared_ptr<const EmbeddingTable> table;
  StepOneModel step1;
  std::map<std::string, SlotValueModel> step2;

  const Ontology& ontology() const { return step1.ontology; }
  SemanticFrame decode(const Turn& turn) const { return decode_turn(turn, step1, step2); }
};

using ProgressFn = std::function<void(const std::string&)>;

Decoder train_decoder(const Dataset& train, const RunConfig& config, const ProgressFn& progress = {});

std::vector<SemanticFrame> decode_all(const Decoder& decoder, const Dataset& ds);

std::vector<std::vector<DialogueAct>> references(const Dataset& ds);

}  // namespace sludec
