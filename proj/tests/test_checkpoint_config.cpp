#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sludec/checkpoint.hpp"
#include "sludec/config.hpp"
#include "sludec/errors.hpp"
#include "sludec/frames.hpp"
#include "synthetic.hpp"

using namespace sludec;

namespace {

RunConfig tiny() {
  RunConfig c;
  c.embed_dim = 8;
  c.maps = 3;
  c.hidden = 5;
  c.max_epochs = 2;
  c.nbest = 3;
  return c;
}

bool same_values(const Network<double>& a, const Network<double>& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i]->name != pb[i]->name || pa[i]->value.rows() != pb[i]->value.rows() ||
        pa[i]->value.cols() != pb[i]->value.cols() || !(pa[i]->value.array() == pb[i]->value.array()).all())
      return false;
  return true;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const RunConfig d;
  CHECK(d.batch_size == 50);
  CHECK(d.dropout == 0.5);
  CHECK(d.rho == 0.95);
  CHECK(d.epsilon == 1e-6);
  CHECK(d.validation_fraction == 0.10);
  CHECK(d.windows == std::vector<int>{3, 4, 5});
  CHECK(d.maps == 100);
  CHECK(d.variant == ModelVariant::cnn_lstm_w4);

  std::istringstream in("# comment\nvariant = cnn\nwindows = 2, 3\n\nbatch_size=7  # trailing\nact_only = yes\n");
  const auto c = RunConfig::parse(in);
  CHECK(c.variant == ModelVariant::cnn);
  CHECK(c.windows == std::vector<int>{2, 3});
  CHECK(c.batch_size == 7);
  CHECK(c.act_only);

  std::istringstream round(c.to_text());
  const auto back = RunConfig::parse(round);
  CHECK(back == c);
  CHECK(back.hash() == c.hash());
  CHECK(c.hash() != d.hash());
  for (const auto& key : RunConfig::keys()) CHECK(d.to_text().find(key + " = ") != std::string::npos);
}

TEST_CASE("config errors name the key") {
  RunConfig c;
  auto message = [&](const std::string& k, const std::string& v) {
    try {
      c.set(k, v);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("learning_rate", "0.1").find("learning_rate") != std::string::npos);
  CHECK(message("dropout", "1.5").find("dropout") != std::string::npos);
  CHECK(message("batch_size", "ten").find("batch_size") != std::string::npos);
  CHECK(message("variant", "rnn").find("variant") != std::string::npos);
  CHECK(message("windows", "").find("windows") != std::string::npos);
  CHECK(message("folds", "1").find("folds") != std::string::npos);
  std::istringstream bad("variant cnn\n");
  CHECK_THROWS_AS(RunConfig::parse(bad), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("network parameters round-trip exactly") {
  auto table = std::make_shared<EmbeddingTable>(6);
  std::mt19937_64 rng(2);
  table->add_random_row("x", rng, false);
  prepare_for_training(*table, {"welcomemsg", "inform"}, rng);
  NetworkShape shape{6, {2, 3}, 3, 4, ModelVariant::cnn_lstm_w4, {5, 2}};
  Network<double> a(shape, table), b(shape, table);
  a.init(rng);

  std::stringstream buf;
  save_network(buf, a, {"step1", "cfg", "ont", 42});
  const auto h = load_network(buf, b);
  CHECK(h.role == "step1");
  CHECK(h.ontology_hash == "ont");
  CHECK(h.seed == 42);
  CHECK(same_values(a, b));

  std::stringstream buf2;
  save_network(buf2, a, {"step1", "cfg", "ont", 42});
  const std::string bytes = buf2.str();

  NetworkShape other = shape;
  other.head_sizes = {6, 2};
  Network<double> c(other, table);
  std::istringstream in(bytes);
  CHECK_THROWS_AS(load_network(in, c), IncompatibilityError);

  other = shape;
  other.variant = ModelVariant::cnn;
  Network<double> d(other, table);
  std::istringstream in2(bytes);
  CHECK_THROWS_AS(load_network(in2, d), IncompatibilityError);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS(load_network(truncated, b));
  std::istringstream garbage("NOTACKPT........");
  CHECK_THROWS_AS(load_network(garbage, b), FormatError);
}

TEST_CASE("embedding tables round-trip exactly") {
  EmbeddingTable t(5, 7);
  std::mt19937_64 rng(4);
  t.add_random_row("north", rng, false);
  t.add_random_row("cheap", rng, false);
  prepare_for_training(t, {"inform", "area"}, rng);
  std::stringstream buf;
  save_table(buf, t);
  const auto back = load_table(buf);
  REQUIRE(back.size() == t.size());
  CHECK(back.dim() == t.dim());
  CHECK(back.oov_row() == t.oov_row());
  CHECK(back.trainable_rows() == t.trainable_rows());
  for (int r = 0; r < t.size(); ++r) {
    CHECK(back.token(r) == t.token(r));
    CHECK((back.row(r).array() == t.row(r).array()).all());
  }
}

TEST_CASE("decoder checkpoints") {
  synth::Options o;
  o.dialogues = 6;
  const auto train = synth::make_dataset(o);
  const auto config = tiny();
  const auto dec = train_decoder(train, config);
  const auto dir = synth::temp_dir("ckpt");
  save_decoder(dir, dec);
  const auto back = load_decoder(dir);

  CHECK(back.config == dec.config);
  CHECK(back.ontology() == dec.ontology());
  CHECK(same_values(back.step1.net, dec.step1.net));
  REQUIRE(back.step2.size() == dec.step2.size());
  for (const auto& [slot, m] : dec.step2) CHECK(same_values(back.step2.at(slot).net, m.net));
  CHECK(decode_all(back, train) == decode_all(dec, train));

  SUBCASE("saving twice gives identical bytes") {
    const auto dir2 = synth::temp_dir("ckpt2");
    save_decoder(dir2, back);
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      std::ifstream a(entry.path(), std::ios::binary), b(dir2 / entry.path().filename(), std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      CHECK_MESSAGE(sa.str() == sb.str(), entry.path().filename().string());
    }
    std::filesystem::remove_all(dir2);
  }
  SUBCASE("a mismatched ontology is refused") {
    std::ofstream(dir / "ontology.json") << R"({"acts":["inform"],"slots":[],"values":{}})";
    CHECK_THROWS_AS(load_decoder(dir), IncompatibilityError);
  }
  SUBCASE("a missing directory is an error") {
    CHECK_THROWS(load_decoder(dir / "nowhere"));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("frames files") {
  FramesFile f;
  f.header = {"c0ffee", "0ddba11", "feed", {"area", "food"}};
  SemanticFrame a;
  a.session = "s1";
  a.index = 3;
  a.act = "inform";
  a.act_confidence = 0.912345678901234;
  a.slots = {{"area", "north", 0.9, 0.81}, {"food", "thai", 0.7, 0.1234567890123}};
  SemanticFrame b;
  b.session = "s1";
  b.index = 4;
  b.act = "null";
  b.act_confidence = 0.5;
  f.frames = {a, b};

  std::stringstream buf;
  write_frames(buf, f);
  const auto back = read_frames(buf);
  CHECK(back.header == f.header);
  CHECK(back.frames == f.frames);

  const auto text = [&] {
    std::stringstream s;
    write_frames(s, f);
    return s.str();
  }();
  std::istringstream short_file(text.substr(0, text.find('\n', text.find('\n') + 1) + 1));
  CHECK_THROWS_AS(read_frames(short_file), FormatError);
  std::istringstream broken(text.substr(0, text.size() - 5) + "\n");
  CHECK_THROWS_AS(read_frames(broken), ParseError);
  auto dup = f;
  dup.frames[0].slots.push_back(dup.frames[0].slots[0]);
  std::stringstream dbuf;
  write_frames(dbuf, dup);
  CHECK_THROWS_AS(read_frames(dbuf), FormatError);
}
