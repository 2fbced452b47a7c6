#include "sludec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "sludec/errors.hpp"

namespace sludec {

namespace {

using json = nlohmann::json;

std::mt19937_64 rng_for(std::uint64_t seed, std::uint32_t stream, std::uint64_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

int argmax(const VectorD& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

int priority_of(const std::string& act) {
  const auto& p = act_priority();
  const auto it = std::find(p.begin(), p.end(), act);
  return it == p.end() ? static_cast<int>(p.size()) : static_cast<int>(it - p.begin());
}

SemanticFrame joint_frame(const JointPrediction& jp, const Ontology& ontology, const Turn& turn) {
  SemanticFrame f;
  f.session = turn.session;
  f.index = turn.index;
  f.act = ontology.acts.at(static_cast<std::size_t>(jp.act));
  f.act_confidence = jp.act_probs(jp.act);
  for (std::size_t s = 0; s < ontology.slots.size(); ++s)
    if (jp.presence[s] > 0.5) f.slots.push_back({ontology.slots[s], "", jp.presence[s], jp.presence[s]});
  return f;
}

// First reference value of the slot, if any.
std::optional<std::string> reference_value(const Turn& turn, const std::string& slot) {
  for (const auto& [s, v] : reference_pairs(turn.reference))
    if (s == slot) return v;
  return std::nullopt;
}

}  // namespace

const std::vector<std::string>& act_priority() {
  static const std::vector<std::string> p{"request", "inform",  "confirm", "deny",     "negate",
                                          "affirm",  "reqalts", "reqmore", "hello",    "bye",
                                          "thankyou", "ack",    "repeat",  "restart", "null"};
  return p;
}

Ontology Ontology::build(const Dataset& train, std::size_t max_acts) {
  if (train.turns.empty()) throw DomainError("ontology: empty training data");
  if (max_acts == 0) throw DomainError("ontology: max_acts must be positive");
  std::map<std::string, long> counts;
  std::map<std::string, std::set<std::string>> values;
  for (const auto& t : train.turns) {
    ++counts[act_pattern(t.reference)];
    for (const auto& [s, v] : reference_pairs(t.reference)) values[s].insert(v);
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Ontology o;
  for (std::size_t i = 0; i < std::min(max_acts, ranked.size()); ++i) o.acts.push_back(ranked[i].first);
  for (const auto& [s, vs] : values) {
    o.slots.push_back(s);
    o.values[s] = {vs.begin(), vs.end()};
  }
  return o;
}

int Ontology::map_pattern(const std::string& pattern) const {
  if (acts.empty()) throw StateError("ontology has no acts");
  const auto it = std::find(acts.begin(), acts.end(), pattern);
  if (it != acts.end()) return static_cast<int>(it - acts.begin());
  auto parts = split_pattern(pattern);
  std::stable_sort(parts.begin(), parts.end(), [](const std::string& a, const std::string& b) {
    return priority_of(a) < priority_of(b);
  });
  for (const auto& a : parts) {
    const auto single = std::find(acts.begin(), acts.end(), a);
    if (single != acts.end()) return static_cast<int>(single - acts.begin());
  }
  return 0;
}

int Ontology::act_label(const std::vector<DialogueAct>& a) const { return map_pattern(act_pattern(a)); }

int Ontology::slot_index(const std::string& slot) const {
  const auto it = std::find(slots.begin(), slots.end(), slot);
  return it == slots.end() ? -1 : static_cast<int>(it - slots.begin());
}

int Ontology::value_index(const std::string& slot, const std::string& value) const {
  const auto it = values.find(slot);
  if (it == values.end()) return -1;
  const auto v = std::find(it->second.begin(), it->second.end(), value);
  return v == it->second.end() ? -1 : static_cast<int>(v - it->second.begin());
}

std::string Ontology::to_json() const {
  json j;
  j["acts"] = acts;
  j["slots"] = slots;
  j["values"] = values;
  return j.dump(2) + "\n";
}

Ontology Ontology::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    Ontology o;
    o.acts = j.at("acts").get<std::vector<std::string>>();
    o.slots = j.at("slots").get<std::vector<std::string>>();
    o.values = j.at("values").get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& s : o.slots)
      if (!o.values.count(s)) throw FormatError("ontology: slot '" + s + "' has no value list");
    if (o.acts.empty()) throw FormatError("ontology: no acts");
    return o;
  } catch (const json::exception& e) {
    throw FormatError(std::string("ontology: ") + e.what());
  }
}

std::string Ontology::hash() const { return hex64(fnv1a(to_json())); }

std::vector<std::size_t> flag_unknown(const Dataset& ds, const Ontology& ontology) {
  std::set<std::string> known_acts;
  for (const auto& p : ontology.acts)
    for (const auto& a : split_pattern(p)) known_acts.insert(a);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.turns.size(); ++i) {
    const auto& ref = ds.turns[i].reference;
    bool unknown = false;
    for (const auto& a : split_pattern(act_pattern(ref)))
      if (!known_acts.count(a)) unknown = true;
    for (const auto& [s, v] : reference_pairs(ref))
      if (ontology.value_index(s, v) < 0) unknown = true;
    if (unknown) out.push_back(i);
  }
  return out;
}

NetworkInput featurize(const Turn& turn, const EmbeddingTable& table, ContextMode mode,
                       std::size_t nbest) {
  NetworkInput in;
  const auto list = turn.nbest();
  for (std::size_t j = 0; j < std::min(nbest, list.size()); ++j) {
    std::vector<int> rows;
    for (const auto& tok : list[j].tokens.tokens) rows.push_back(table.row_of(tok));
    in.hypotheses.push_back(std::move(rows));
    in.confidences.push_back(list[j].confidence);
  }
  if (in.hypotheses.empty()) {
    in.hypotheses.emplace_back();
    in.confidences.push_back(1.0);
  }
  if (mode != ContextMode::none)
    for (const auto& tok : context_tokens(select_context(turn.system_acts, mode)).tokens)
      in.context_rows.push_back(table.row_of(tok));
  return in;
}

std::vector<int> step1_targets(const Turn& turn, const Ontology& ontology) {
  std::vector<int> t{ontology.act_label(turn.reference)};
  const auto pairs = reference_pairs(turn.reference);
  for (const auto& s : ontology.slots)
    t.push_back(std::any_of(pairs.begin(), pairs.end(), [&](const SlotValue& p) { return p.first == s; })
                    ? 1
                    : 0);
  return t;
}

TrainOptions TrainOptions::from(const RunConfig& c) {
  TrainOptions o;
  o.batch_size = c.batch_size;
  o.max_epochs = c.max_epochs;
  o.patience = c.patience;
  o.dropout = c.dropout;
  o.rho = c.rho;
  o.epsilon = c.epsilon;
  o.seed = c.seed;
  return o;
}

TrainingLog train_network(Network<double>& net, const std::vector<Example>& examples,
                          const TrainOptions& options, const Validator& validate, const EpochHook& hook) {
  if (examples.empty()) throw DomainError("training: no examples");
  if (options.batch_size < 1) throw DomainError("training: batch size must be positive");
  std::vector<double> weights = options.head_weights;
  if (weights.empty()) weights.assign(net.num_heads(), 1.0);

  auto rng = rng_for(options.seed, 1);
  Adadelta<double> optimizer(net.parameters(), options.rho, options.epsilon);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainingLog log;
  std::optional<Network<double>> best;
  int since_best = 0;
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
      optimizer.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = examples[order[i]];
        const auto pass = net.forward(ex.input, Mode::train, options.dropout, rng);
        total += net.loss(pass, ex.targets, weights);
        net.backward(pass, ex.targets, weights);
      }
      optimizer.step(1.0 / static_cast<double>(end - start));
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = total / static_cast<double>(examples.size());
    if (!std::isfinite(stats.train_loss) || !net.parameters_finite())
      throw NumericError("training diverged at epoch " + std::to_string(epoch));

    if (validate) {
      stats.validation = validate(net);
      if (!log.best_validation || *stats.validation > *log.best_validation) {
        log.best_validation = stats.validation;
        log.best_epoch = epoch;
        best = net;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      log.best_epoch = epoch;
    }
    log.epochs.push_back(stats);
    if (hook && hook(stats, net)) break;
    if (validate && since_best >= options.patience) break;
  }
  if (best) net = *best;
  return log;
}

JointPrediction predict_joint(const Network<double>& net, const NetworkInput& input) {
  if (!net.parameters_finite()) throw StateError("model parameters are not finite");
  const auto pass = net.predict(input);
  JointPrediction jp;
  jp.act_probs = pass.probs.at(0);
  jp.act = argmax(jp.act_probs);
  for (std::size_t i = 1; i < pass.probs.size(); ++i) jp.presence.push_back(pass.probs[i](1));
  return jp;
}

JointPrediction StepOneModel::predict(const Turn& turn) const {
  return predict_joint(net, featurize(turn, net.table(), context_mode(net.shape().variant), nbest));
}

SemanticFrame StepOneModel::frame(const Turn& turn) const { return joint_frame(predict(turn), ontology, turn); }

VectorD SlotValueModel::predict(const Turn& turn) const {
  if (!net.parameters_finite()) throw StateError("value model for '" + slot + "' is not finite");
  return net.predict(featurize(turn, net.table(), context_mode(net.shape().variant), nbest)).probs.at(0);
}

VectorD predict_value(const Turn& turn, const std::string& slot,
                      const std::map<std::string, SlotValueModel>& models) {
  const auto it = models.find(slot);
  if (it == models.end()) throw DomainError("no value model for slot '" + slot + "'");
  return it->second.predict(turn);
}

SemanticFrame decode_turn(const Turn& turn, const StepOneModel& step1,
                          const std::map<std::string, SlotValueModel>& step2) {
  SemanticFrame f = step1.frame(turn);
  for (auto& s : f.slots) {
    const auto& inventory = step1.ontology.values.at(s.slot);
    if (inventory.size() == 1) {
      s.value = inventory.front();
      continue;
    }
    const auto it = step2.find(s.slot);
    if (it == step2.end()) throw StateError("no value model for detected slot '" + s.slot + "'");
    if (it->second.values != inventory)
      throw IncompatibilityError("value model for '" + s.slot + "' disagrees with the ontology");
    const VectorD p = it->second.predict(turn);
    const int v = argmax(p);
    s.value = inventory[static_cast<std::size_t>(v)];
    s.confidence = s.presence * p(v);
  }
  return f;
}

std::shared_ptr<EmbeddingTable> build_table(const RunConfig& config, const Dataset& train) {
  auto table = std::make_shared<EmbeddingTable>(
      config.embeddings.empty() ? EmbeddingTable(config.embed_dim, config.seed)
                                : EmbeddingTable::load(config.embeddings, config.embed_dim, config.seed));
  auto rng = rng_for(config.seed, 0);
  if (config.embeddings.empty())
    for (const auto& t : train.turns)
      for (const auto& h : t.hyps)
        for (const auto& tok : tokenize(h.text, Origin::user_hypothesis).tokens)
          if (!table->find(tok)) table->add_random_row(tok, rng, false);

  std::vector<std::string> act_vocab;
  std::set<std::string> seen;
  for (const auto& t : train.turns)
    for (const auto& st : t.system_acts)
      for (const auto& tok : encode_system_turn(st).tokens)
        if (seen.insert(tok).second) act_vocab.push_back(tok);
  prepare_for_training(*table, act_vocab, rng);
  return table;
}

StepOneModel train_step1(const Dataset& train, const Ontology& ontology,
                         std::shared_ptr<const EmbeddingTable> table, const RunConfig& config,
                         TrainingLog* log) {
  if (train.turns.empty()) throw DomainError("train_step1: empty dataset");
  const auto mode = context_mode(config.variant);
  const auto nbest = static_cast<std::size_t>(config.nbest);

  Dataset fit = train, held;
  if (train.num_dialogues() >= 2)
    std::tie(fit, held) = split_validation(train, config.validation_fraction, config.split_seed);

  std::vector<Example> examples;
  for (const auto& t : fit.turns) examples.push_back({featurize(t, *table, mode, nbest), step1_targets(t, ontology)});

  std::vector<int> heads{static_cast<int>(ontology.acts.size())};
  heads.insert(heads.end(), ontology.slots.size(), 2);
  StepOneModel model{ontology, Network<double>(config.shape(heads), table), nbest};
  auto init_rng = rng_for(config.seed, 2);
  model.net.init(init_rng);

  auto options = TrainOptions::from(config);
  if (config.act_only) {
    options.head_weights.assign(heads.size(), 0.0);
    options.head_weights[0] = 1.0;
  }

  Validator validate;
  std::vector<NetworkInput> held_inputs;
  std::vector<std::vector<DialogueAct>> held_refs;
  for (const auto& t : held.turns) {
    held_inputs.push_back(featurize(t, *table, mode, nbest));
    held_refs.push_back(t.reference);
  }
  if (!held_inputs.empty()) {
    validate = [&](const Network<double>& net) {
      std::vector<SemanticFrame> frames;
      for (std::size_t i = 0; i < held_inputs.size(); ++i)
        frames.push_back(joint_frame(predict_joint(net, held_inputs[i]), ontology, held.turns[i]));
      return evaluate(frames, held_refs, ontology.slots, EvalLevel::step1).f1;
    };
  }
  auto l = train_network(model.net, examples, options, validate);
  if (log) *log = std::move(l);
  return model;
}

std::optional<SlotValueModel> train_step2(const Dataset& train, const Ontology& ontology,
                                          const std::string& slot,
                                          std::shared_ptr<const EmbeddingTable> table,
                                          const RunConfig& config, TrainingLog* log) {
  const auto vit = ontology.values.find(slot);
  if (vit == ontology.values.end()) throw DomainError("train_step2: slot '" + slot + "' not in ontology");
  if (vit->second.size() < 2) return std::nullopt;
  const auto mode = context_mode(config.variant);
  const auto nbest = static_cast<std::size_t>(config.nbest);

  Dataset fit = train, held;
  if (train.num_dialogues() >= 2)
    std::tie(fit, held) = split_validation(train, config.validation_fraction, config.split_seed);

  auto collect = [&](const Dataset& ds) {
    std::vector<Example> out;
    for (const auto& t : ds.turns)
      if (auto v = reference_value(t, slot)) {
        const int target = ontology.value_index(slot, *v);
        if (target >= 0) out.push_back({featurize(t, *table, mode, nbest), {target}});
      }
    return out;
  };
  auto examples = collect(fit);
  auto held_examples = collect(held);
  if (examples.empty()) {
    // every turn with this slot fell into the validation split
    examples = collect(train);
    held_examples.clear();
  }
  if (examples.empty()) throw DomainError("train_step2: no training turns contain slot '" + slot + "'");

  SlotValueModel model{slot, vit->second,
                       Network<double>(config.shape({static_cast<int>(vit->second.size())}), table), nbest};
  auto init_rng = rng_for(config.seed, 3, fnv1a(slot));
  model.net.init(init_rng);

  auto options = TrainOptions::from(config);
  options.seed = fnv1a(slot, config.seed);
  Validator validate;
  if (!held_examples.empty()) {
    validate = [&](const Network<double>& net) {
      long correct = 0;
      for (const auto& ex : held_examples)
        if (argmax(net.predict(ex.input).probs[0]) == ex.targets[0]) ++correct;
      return static_cast<double>(correct) / static_cast<double>(held_examples.size());
    };
  }
  auto l = train_network(model.net, examples, options, validate);
  if (log) *log = std::move(l);
  return model;
}

Decoder train_decoder(const Dataset& train, const RunConfig& config, const ProgressFn& progress) {
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const auto ontology = Ontology::build(train, static_cast<std::size_t>(config.max_acts));
  say("ontology: " + std::to_string(ontology.acts.size()) + " acts, " +
      std::to_string(ontology.slots.size()) + " slots");
  std::shared_ptr<const EmbeddingTable> table = build_table(config, train);
  say("embeddings: " + std::to_string(table->vocab_size()) + " tokens, " +
      std::to_string(table->trainable_rows().size()) + " trainable");

  TrainingLog log1;
  Decoder dec{config, table, train_step1(train, ontology, table, config, &log1), {}};
  say("step1: " + std::to_string(log1.epochs.size()) + " epochs, best epoch " +
      std::to_string(log1.best_epoch) +
      (log1.best_validation ? ", validation f1 " + std::to_string(*log1.best_validation) : ""));
  if (config.act_only) return dec;

  std::vector<std::pair<std::string, std::future<std::optional<SlotValueModel>>>> jobs;
  std::vector<TrainingLog> logs(ontology.slots.size());
  for (std::size_t i = 0; i < ontology.slots.size(); ++i) {
    const auto& slot = ontology.slots[i];
    jobs.emplace_back(slot, std::async(std::launch::async, [&, i, slot] {
                        return train_step2(train, ontology, slot, table, config, &logs[i]);
                      }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto m = jobs[i].second.get();
    if (!m) {
      say("step2: slot '" + jobs[i].first + "' has a single value; skipped");
      continue;
    }
    say("step2: slot '" + jobs[i].first + "' " + std::to_string(m->values.size()) + " values, " +
        std::to_string(logs[i].epochs.size()) + " epochs");
    dec.step2.emplace(jobs[i].first, std::move(*m));
  }
  return dec;
}

std::vector<SemanticFrame> decode_all(const Decoder& decoder, const Dataset& ds) {
  std::vector<SemanticFrame> out;
  out.reserve(ds.turns.size());
  for (const auto& t : ds.turns) out.push_back(decoder.decode(t));
  return out;
}

std::vector<std::vector<DialogueAct>> references(const Dataset& ds) {
  std::vector<std::vector<DialogueAct>> out;
  for (const auto& t : ds.turns) out.push_back(t.reference);
  return out;
}

}  // namespace sludec
