#include <cmath>
#include <set>

#include "doctest.h"
#include "sludec/decoder.hpp"
#include "sludec/errors.hpp"
#include "synthetic.hpp"

using namespace sludec;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.embed_dim = 12;
  c.windows = {3, 4, 5};
  c.maps = 6;
  c.hidden = 8;
  c.batch_size = 10;
  c.max_epochs = 6;
  c.patience = 3;
  c.nbest = 4;
  return c;
}

Dataset corpus(int dialogues, std::uint64_t seed = 1) {
  synth::Options o;
  o.dialogues = dialogues;
  o.seed = seed;
  return synth::make_dataset(o);
}

Turn turn_with(std::vector<DialogueAct> reference) {
  Turn t;
  t.session = "s";
  t.hyps = {{"cheap", 1.0}};
  t.system_acts = {{{"welcomemsg", {}}}};
  t.reference = std::move(reference);
  return t;
}

}  // namespace

TEST_CASE("ontology from annotations") {
  Dataset ds;
  for (int i = 0; i < 5; ++i) ds.turns.push_back(turn_with({{"inform", {{"pricerange", "cheap"}}}}));
  for (int i = 0; i < 3; ++i) ds.turns.push_back(turn_with({{"request", {{"slot", "food"}}}}));
  ds.turns.push_back(turn_with({{"inform", {{"pricerange", "moderate"}}}}));
  ds.turns.push_back(turn_with({{"affirm", {}}, {"inform", {{"area", "north"}}}}));
  ds.turns.push_back(turn_with({{"thankyou", {}}, {"bye", {}}}));
  ds.turns.push_back(turn_with({{"bye", {}}}));
  ds.turns.push_back(turn_with({{"bye", {}}}));

  const auto o = Ontology::build(ds, 3);
  CHECK(o.acts == std::vector<std::string>{"inform", "request", "bye"});
  CHECK(o.slots == std::vector<std::string>{"area", "pricerange", "slot"});
  CHECK(o.values.at("pricerange") == std::vector<std::string>{"cheap", "moderate"});

  CHECK(o.map_pattern("inform") == 0);
  CHECK(o.map_pattern("affirm+inform") == 0);
  CHECK(o.map_pattern("bye+thankyou") == 2);
  CHECK(o.map_pattern("ack") == 0);
  CHECK(o.slot_index("food") == -1);
  CHECK(o.value_index("pricerange", "moderate") == 1);
  CHECK(o.value_index("pricerange", "expensive") == -1);

  const auto back = Ontology::from_json(o.to_json());
  CHECK(back == o);
  CHECK(back.hash() == o.hash());
  CHECK_THROWS_AS(Ontology::from_json("{\"acts\": 3}"), FormatError);
  CHECK_THROWS_AS(Ontology::from_json("not json"), FormatError);

  const auto t = turn_with({{"inform", {{"pricerange", "cheap"}, {"area", "north"}}}});
  CHECK(step1_targets(t, o) == std::vector<int>{0, 1, 1, 0});

  Dataset test;
  test.turns = {turn_with({{"inform", {{"food", "thai"}}}}), turn_with({{"bye", {}}})};
  CHECK(flag_unknown(test, o) == std::vector<std::size_t>{0});
}

TEST_CASE("ontology on the synthetic corpus") {
  const auto o = Ontology::build(corpus(30), 14);
  CHECK(o.acts.size() <= 14);
  CHECK(o.values.at("pricerange") == std::vector<std::string>{"cheap", "dontcare", "expensive", "moderate"});
  CHECK(o.values.at("this") == std::vector<std::string>{"dontcare"});
}

TEST_CASE("featurize") {
  const auto ds = synth::example_dialogue();
  EmbeddingTable table(6);
  for (const auto& tok : {"i", "want", "a", "moderately", "priced", "restaurant"}) {
    VectorD v = VectorD::Ones(6);
    table.add_row(tok, v, false);
  }
  const auto in = featurize(ds.turns[0], table, ContextMode::last_4, 10);
  CHECK(in.hypotheses.size() == in.confidences.size());
  CHECK(in.context_rows.size() == 1);

  Turn empty = ds.turns[0];
  empty.hyps.clear();
  const auto e = featurize(empty, table, ContextMode::none, 10);
  REQUIRE(e.hypotheses.size() == 1);
  CHECK(e.hypotheses[0].empty());
  CHECK(e.confidences[0] == 1.0);
  CHECK(e.context_rows.empty());
}

TEST_CASE("frame assembly composes presence and value probability") {
  Dataset ds;
  ds.turns = {turn_with({{"inform", {{"pricerange", "cheap"}, {"type", "restaurant"}}}}),
              turn_with({{"inform", {{"pricerange", "moderate"}}}})};
  const auto ontology = Ontology::build(ds);
  auto table = std::make_shared<EmbeddingTable>(4);
  auto config = small_config();
  config.embed_dim = 4;
  config.variant = ModelVariant::cnn;

  // Zero weights, so every head is softmax(bias).
  StepOneModel step1{ontology, Network<double>(config.shape({1, 2, 2}), table), 4};
  step1.net.find_parameter("head1.b")->value(1, 0) = std::log(4.0);   // pricerange present, 0.8
  step1.net.find_parameter("head2.b")->value(1, 0) = std::log(9.0);   // type present, 0.9
  std::map<std::string, SlotValueModel> step2;
  step2.emplace("pricerange", SlotValueModel{"pricerange", {"cheap", "moderate"},
                                             Network<double>(config.shape({2}), table), 4});
  step2.at("pricerange").net.find_parameter("head0.b")->value(0, 0) = std::log(9.0);  // cheap, 0.9

  const auto f = decode_turn(ds.turns[0], step1, step2);
  CHECK(f.act == "inform");
  CHECK(f.act_confidence == doctest::Approx(1.0));
  REQUIRE(f.slots.size() == 2);
  CHECK(f.slots[0].slot == "pricerange");
  CHECK(f.slots[0].value == "cheap");
  CHECK(f.slots[0].presence == doctest::Approx(0.8));
  CHECK(f.slots[0].confidence == doctest::Approx(0.72));
  // A single-value slot needs no value model.
  CHECK(f.slots[1].slot == "type");
  CHECK(f.slots[1].value == "restaurant");
  CHECK(f.slots[1].confidence == doctest::Approx(0.9));

  CHECK_THROWS_AS(predict_value(ds.turns[0], "food", step2), DomainError);
  auto wrong = step2;
  wrong.at("pricerange").values = {"moderate", "cheap"};
  CHECK_THROWS_AS(decode_turn(ds.turns[0], step1, wrong), IncompatibilityError);
  CHECK_THROWS_AS(decode_turn(ds.turns[0], step1, {}), StateError);

  step1.net.find_parameter("head1.b")->value(1, 0) = 0.0;  // P = 0.5 is not a detection
  CHECK(decode_turn(ds.turns[0], step1, step2).slots.size() == 1);
}

TEST_CASE("a value model can overfit twenty turns") {
  Dataset all = corpus(60, 4);
  Dataset some;
  for (const auto& t : all.turns) {
    bool has = false;
    for (const auto& [s, v] : reference_pairs(t.reference)) has = has || s == "pricerange";
    if (has && some.turns.size() < 20) some.turns.push_back(t);
  }
  REQUIRE(some.turns.size() == 20);
  const auto ontology = Ontology::build(all);
  auto config = small_config();
  config.dropout = 0.0;
  const auto table = build_table(config, all);
  const auto& values = ontology.values.at("pricerange");

  std::vector<Example> examples;
  for (const auto& t : some.turns)
    for (const auto& [s, v] : reference_pairs(t.reference))
      if (s == "pricerange") {
        examples.push_back({featurize(t, *table, ContextMode::last_4, 4), {ontology.value_index(s, v)}});
        break;
      }
  Network<double> net(config.shape({static_cast<int>(values.size())}), table);
  std::mt19937_64 rng(3);
  net.init(rng);
  auto options = TrainOptions::from(config);
  options.max_epochs = 150;
  options.batch_size = 5;
  train_network(net, examples, options, {}, [&](const EpochStats&, const Network<double>& n) {
    for (const auto& ex : examples) {
      Eigen::Index best = 0;
      n.predict(ex.input).probs[0].maxCoeff(&best);
      if (best != ex.targets[0]) return false;
    }
    return true;
  });
  int correct = 0;
  for (const auto& ex : examples) {
    Eigen::Index best = 0;
    net.predict(ex.input).probs[0].maxCoeff(&best);
    correct += best == ex.targets[0];
  }
  CHECK(correct >= 19);
}

TEST_CASE("training errors") {
  auto table = std::make_shared<EmbeddingTable>(4);
  auto config = small_config();
  config.embed_dim = 4;
  Network<double> net(config.shape({2}), table);
  CHECK_THROWS_AS(train_network(net, {}, TrainOptions::from(config)), DomainError);

  Example ex{NetworkInput{{{}}, {1.0}, {}}, {1}};
  std::mt19937_64 rng(1);
  net.init(rng);
  net.find_parameter("head0.W")->value(0, 0) = std::nan("");
  CHECK_THROWS_AS(train_network(net, {ex}, TrainOptions::from(config)), NumericError);
}

TEST_CASE("end to end training") {
  const auto train = corpus(16, 2);
  const auto test = corpus(4, 9);
  auto config = small_config();

  const auto a = train_decoder(train, config);
  const auto& o = a.ontology();
  CHECK(o.acts.size() >= 3);
  CHECK(a.step1.net.num_heads() == 1 + o.slots.size());
  for (const auto& slot : o.slots)
    CHECK(a.step2.count(slot) == (o.values.at(slot).size() >= 2 ? 1u : 0u));

  const auto frames = decode_all(a, test);
  REQUIRE(frames.size() == test.turns.size());
  for (const auto& f : frames) {
    CHECK(std::find(o.acts.begin(), o.acts.end(), f.act) != o.acts.end());
    CHECK(f.act_confidence >= 0.0);
    CHECK(f.act_confidence <= 1.0);
    for (const auto& s : f.slots) {
      REQUIRE(o.values.count(s.slot));
      const auto& vs = o.values.at(s.slot);
      CHECK(std::find(vs.begin(), vs.end(), s.value) != vs.end());
      CHECK(s.presence > 0.5);
      CHECK(s.confidence <= s.presence);
    }
  }

  SUBCASE("deterministic") {
    const auto b = train_decoder(train, config);
    CHECK(decode_all(b, test) == frames);
    for (const auto* p : a.step1.net.parameters()) {
      auto* q = const_cast<Network<double>&>(b.step1.net).find_parameter(p->name);
      REQUIRE(q);
      CHECK((p->value.array() == q->value.array()).all());
    }
  }
  SUBCASE("frozen rows are untouched") {
    const auto fresh = build_table(config, train);
    REQUIRE(fresh->size() == a.table->size());
    for (int r = 0; r < fresh->size(); ++r) CHECK((fresh->row(r).array() == a.table->row(r).array()).all());
    const auto* tuned = const_cast<Network<double>&>(a.step1.net).find_parameter("embed.system_act");
    REQUIRE(tuned);
    const auto rows = a.table->trainable_rows();
    double moved = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      moved += (tuned->value.row(static_cast<Eigen::Index>(i)).transpose() - a.table->row(rows[i])).norm();
    CHECK(moved > 0);
  }
}

TEST_CASE("act-only training skips the value models") {
  auto config = small_config();
  config.act_only = true;
  config.max_epochs = 3;
  const auto d = train_decoder(corpus(6, 5), config);
  CHECK(d.step2.empty());
  CHECK_NOTHROW(d.step1.frame(corpus(1, 7).turns[0]));
}
