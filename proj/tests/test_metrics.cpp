#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sludec/errors.hpp"
#include "sludec/metrics.hpp"

using namespace sludec;

namespace {
const auto A = SemanticItem::act("inform");
const auto B = SemanticItem::pair("food", "thai");
const auto C = SemanticItem::pair("area", "north");
}  // namespace

TEST_CASE("item counts") {
  CHECK(item_counts({{A, B}}, {{A, B}}) == ItemCounts{2, 0, 0});
  CHECK(item_counts({{A, B}}, {{B, C}}) == ItemCounts{1, 1, 1});
  CHECK(item_counts({{}}, {{A, B, C}}) == ItemCounts{0, 0, 3});
  CHECK(item_counts({{A, A, B}}, {{A, B}}) == ItemCounts{2, 0, 0});
  CHECK_THROWS_AS(item_counts({{A}}, {}), DomainError);
}

TEST_CASE("precision, recall, F1") {
  auto m = prf1({1, 1, 1});
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 0.5);
  CHECK(m.f1 == 0.5);
  m = prf1({0, 0, 0});
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(prf1({0, 5, 5}).f1 == 0.0);
  m = prf1({3, 1, 2});
  CHECK(m.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
}

TEST_CASE("counts agree with a set-intersection oracle on random turns") {
  std::mt19937_64 rng(99);
  std::vector<SemanticItem> universe{A, B, C, SemanticItem::act("request"), SemanticItem::pair("food", "chinese"),
                                     SemanticItem::pair("pricerange", "cheap"), SemanticItem::pair("this", "dontcare")};
  std::uniform_int_distribution<int> len(0, 5), pick(0, static_cast<int>(universe.size()) - 1);
  std::vector<ItemSet> pred, ref;
  for (int u = 0; u < 1000; ++u) {
    ItemSet p, r;
    for (int i = len(rng); i > 0; --i) p.push_back(universe[pick(rng)]);
    for (int i = len(rng); i > 0; --i) r.push_back(universe[pick(rng)]);
    pred.push_back(p);
    ref.push_back(r);
  }
  const auto c = item_counts(pred, ref);
  const auto o = oracle::brute_counts(pred, ref);
  CHECK(c.tp == o.tp);
  CHECK(c.fp == o.fp);
  CHECK(c.fn == o.fn);

  std::shuffle(pred.begin(), pred.end(), std::mt19937_64(1));
  std::shuffle(ref.begin(), ref.end(), std::mt19937_64(1));
  CHECK(item_counts(pred, ref) == c);
}

TEST_CASE("joint accuracy is the mean of per-head accuracies") {
  std::vector<HeadOutputs> ref, pred;
  for (int u = 0; u < 40; ++u) {
    HeadOutputs r{"inform", {u % 2 == 0, u % 3 == 0, false, true, u % 5 == 0}};
    ref.push_back(r);
    r.act = "request";
    pred.push_back(r);
  }
  CHECK(joint_accuracy(ref, ref) == 1.0);
  CHECK(joint_accuracy(pred, ref) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> act(0, 13);
  ref.clear();
  pred.clear();
  for (int u = 0; u < 20000; ++u) {
    ref.push_back({"a0", {true, false, false, true, false}});
    pred.push_back({"a" + std::to_string(act(rng)), ref.back().present});
  }
  CHECK(joint_accuracy(pred, ref) == doctest::Approx((1.0 / 14 + 5) / 6).epsilon(0.005));
}

TEST_CASE("item cross entropy examples") {
  CHECK(*ice({{{A, 1.0}, {B, 1.0}}}, {{A, B}}) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(*ice({{{A, 0.5}}}, {{A}}) - 0.693147) < 1e-6);
  CHECK(std::abs(*ice({{{A, 1.0}, {B, 0.5}}}, {{A}}) - 0.693147) < 1e-6);
  CHECK(std::abs(*ice({{{A, 0.5}}}, {{A}}) - std::log(2.0)) < 1e-12);
  // A reference item never hypothesized costs the clamp bound.
  CHECK(*ice({{}}, {{A}}) == doctest::Approx(-std::log(kIceClamp)));
  CHECK_FALSE(ice({{{A, 0.3}}}, {{}}).has_value());
  CHECK_THROWS_AS(ice({{{A, 1.5}}}, {{A}}), DomainError);
}

TEST_CASE("item cross entropy is monotone in confidence") {
  double prev_correct = 1e9, prev_wrong = -1;
  for (double c = 0.05; c <= 0.951; c += 0.05) {
    const double correct = *ice({{{A, c}, {B, 0.2}}}, {{A}});
    const double wrong = *ice({{{A, 0.9}, {B, c}}}, {{A}});
    CHECK(correct < prev_correct);
    CHECK(wrong > prev_wrong);
    CHECK(correct >= 0);
    prev_correct = correct;
    prev_wrong = wrong;
  }
}

TEST_CASE("evaluate on perfect frames") {
  std::vector<std::vector<DialogueAct>> refs{
      {{"inform", {{"area", "north"}, {"pricerange", "moderate"}}}},
      {{"request", {{"slot", "phone"}}}},
      {{"thankyou", {}}, {"bye", {}}}};
  std::vector<SemanticFrame> frames;
  for (const auto& r : refs) {
    SemanticFrame f;
    f.act = act_pattern(r);
    f.act_confidence = 1.0;
    for (const auto& [s, v] : reference_pairs(r)) f.slots.push_back({s, v, 1.0, 1.0});
    frames.push_back(f);
  }
  const std::vector<std::string> slots{"area", "food", "pricerange", "slot", "this"};
  for (auto level : {EvalLevel::full, EvalLevel::step1}) {
    const auto rep = evaluate(frames, refs, slots, level);
    CHECK(rep.f1 == 1.0);
    CHECK(rep.accuracy == 1.0);
    CHECK(*rep.ice == doctest::Approx(0.0));
    CHECK(rep.n_reference_items == 6);
    CHECK(rep.per_slot.at("area").accuracy == 1.0);
    CHECK(rep.per_slot.at("food").reference_turns == 0);
  }
  CHECK(evaluate(frames, refs, slots, EvalLevel::full).to_table().find("f1\t1.000000") != std::string::npos);

  frames[0].slots[0].value = "south";
  const auto full = evaluate(frames, refs, slots, EvalLevel::full);
  CHECK(full.counts == ItemCounts{5, 1, 1});
  CHECK(full.per_slot.at("area").accuracy == 0.0);
  CHECK(evaluate(frames, refs, slots, EvalLevel::step1).f1 == 1.0);
  CHECK_THROWS_AS(evaluate({}, refs, slots, EvalLevel::full), DomainError);
}
