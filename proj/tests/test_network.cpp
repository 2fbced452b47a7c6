#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sludec/errors.hpp"
#include "sludec/network.hpp"

using namespace sludec;

namespace {

// Toy table: a few frozen hypothesis words and trainable system-act words.
std::shared_ptr<EmbeddingTable> toy_table(int k) {
  auto t = std::make_shared<EmbeddingTable>(k, 3);
  std::mt19937_64 rng(4);
  for (const char* w : {"i", "want", "cheap", "food", "north"}) t->add_random_row(w, rng, false);
  for (const char* w : {"request", "area", "offer", "name"}) t->add_random_row(w, rng, true);
  t->set_trainable(t->oov_row(), true);
  return t;
}

NetworkShape toy_shape(ModelVariant v) {
  NetworkShape s;
  s.embed_dim = 4;
  s.windows = {3, 4, 5};
  s.maps = 2;
  s.hidden = 6;
  s.variant = v;
  s.head_sizes = {3, 2, 2};
  return s;
}

NetworkInput toy_input(const EmbeddingTable& t) {
  NetworkInput in;
  in.hypotheses = {{t.row_of("i"), t.row_of("want"), t.row_of("cheap"), t.row_of("food")},
                   {t.row_of("cheap"), t.row_of("food")},
                   {t.row_of("north"), t.row_of("zzz")}};
  in.confidences = {0.6, 0.3, 0.1};
  in.context_rows = {t.row_of("request"), t.row_of("area"), t.row_of("offer"), t.row_of("name"), t.row_of("xyz")};
  return in;
}

}  // namespace

TEST_CASE("variants") {
  CHECK(parse_variant("cnn_lstm_w4") == ModelVariant::cnn_lstm_w4);
  CHECK_THROWS_AS(parse_variant("cnn_lstm_w3"), ConfigError);
  for (auto v : {ModelVariant::cnn, ModelVariant::cnn_lstm_w1, ModelVariant::cnn_lstm_w4, ModelVariant::cnn_lstm_w,
                 ModelVariant::lstm_all})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK(context_mode(ModelVariant::cnn) == ContextMode::none);
  CHECK(combine_mode(ModelVariant::lstm_all) == CombineMode::lstm_input);
  CHECK(toy_shape(ModelVariant::cnn).feature_dim() == 6);
  NetworkShape defaults;
  CHECK(defaults.sentence_dim() == 300);
}

TEST_CASE("full model gradients for every variant") {
  const auto table = toy_table(4);
  const auto in = toy_input(*table);
  for (auto v : {ModelVariant::cnn, ModelVariant::cnn_lstm_w1, ModelVariant::cnn_lstm_w4, ModelVariant::lstm_all}) {
    CAPTURE(to_string(v));
    Network<double> net(toy_shape(v), table);
    std::mt19937_64 rng(12);
    net.init(rng);
    for (auto* p : net.parameters()) p->value *= 4;  // larger weights exercise the nonlinearities
    const auto r = oracle::check_network(net, in, {2, 1, 0}, 77, 6);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("zero weights give uniform heads") {
  const auto table = toy_table(4);
  Network<double> net(toy_shape(ModelVariant::cnn_lstm_w4), table);
  const auto pass = net.predict(toy_input(*table));
  CHECK(pass.probs[0].isApprox(VectorD::Constant(3, 1.0 / 3)));
  CHECK(pass.probs[1](1) == doctest::Approx(0.5));
}

TEST_CASE("act logits [0, ln 2, 0]") {
  const auto table = toy_table(4);
  auto shape = toy_shape(ModelVariant::cnn);
  shape.head_sizes = {3};
  Network<double> net(shape, table);
  net.find_parameter("head0.b")->value(1, 0) = std::log(2.0);
  const auto pass = net.predict(toy_input(*table));
  CHECK(pass.probs[0](1) == doctest::Approx(2.0 / 4).epsilon(1e-12));
}

TEST_CASE("non-finite parameters are reported") {
  const auto table = toy_table(4);
  Network<double> net(toy_shape(ModelVariant::cnn), table);
  net.find_parameter("head0.W")->value(0, 0) = std::nan("");
  CHECK_FALSE(net.parameters_finite());
  net.find_parameter("head0.W")->value.setZero();
  net.find_parameter("head0.b")->value(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(net.predict(toy_input(*table)), NumericError);
}

TEST_CASE("backward needs a completed pass") {
  const auto table = toy_table(4);
  Network<double> net(toy_shape(ModelVariant::cnn), table);
  Network<double>::Pass empty;
  CHECK_THROWS_AS(net.backward(empty, {0, 0, 0}, {1, 1, 1}), StateError);
}

TEST_CASE("plain CNN ignores history") {
  const auto table = toy_table(4);
  Network<double> net(toy_shape(ModelVariant::cnn), table);
  std::mt19937_64 rng(2);
  net.init(rng);
  auto a = toy_input(*table), b = a;
  b.context_rows = {table->row_of("offer")};
  CHECK(net.predict(a).probs[0] == net.predict(b).probs[0]);
}

TEST_CASE("context embeddings are tuned copies") {
  const auto table = toy_table(4);
  Network<double> net(toy_shape(ModelVariant::cnn_lstm_w4), table);
  auto* emb = net.find_parameter("embed.system_act");
  REQUIRE(emb != nullptr);
  CHECK(emb->value.rows() == static_cast<Eigen::Index>(table->trainable_rows().size()));
  const int r = table->row_of("offer");
  CHECK(net.context_embedding(r) == table->row(r));
  emb->value.setConstant(0.5);
  CHECK(net.context_embedding(r) == VectorD::Constant(4, 0.5));
  CHECK(table->row(r) != VectorD::Constant(4, 0.5));
  CHECK(net.context_embedding(table->row_of("i")) == table->row(table->row_of("i")));
}

TEST_CASE("table dimension must match") {
  const auto table = toy_table(4);
  auto shape = toy_shape(ModelVariant::cnn);
  shape.embed_dim = 5;
  CHECK_THROWS_AS(Network<double>(shape, table), DimensionError);
}
