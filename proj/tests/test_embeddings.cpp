#include <fstream>
#include <random>

#include "doctest.h"
#include "sludec/embeddings.hpp"
#include "sludec/errors.hpp"
#include "synthetic.hpp"

using namespace sludec;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto dir = synth::temp_dir("emb");
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string vector_line(const std::string& token, int k, double base) {
  std::string s = token;
  for (int i = 0; i < k; ++i) s += " " + std::to_string(base + 0.001 * i);
  return s + "\n";
}

}  // namespace

TEST_CASE("load vectors") {
  SUBCASE("two valid lines") {
    const auto p = write_file("v.txt", vector_line("north", 100, 0.1) + vector_line("south", 100, 0.2));
    const auto t = EmbeddingTable::load(p, 100);
    CHECK(t.vocab_size() == 2);
    CHECK(t.dim() == 100);
    CHECK(t.row(*t.find("south"))(3) == doctest::Approx(0.203));
    for (int r = 0; r < t.size(); ++r) CHECK_FALSE(t.trainable(r));
  }
  SUBCASE("wrong arity is a parse error at that line") {
    const auto p = write_file("v.txt", vector_line("north", 100, 0.1) + "the 0.1 0.2\n");
    try {
      EmbeddingTable::load(p, 100);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
    }
  }
  SUBCASE("unparseable real") {
    const auto p = write_file("v.txt", "north 0.1 abc 0.3\n");
    CHECK_THROWS_AS(EmbeddingTable::load(p), ParseError);
  }
  SUBCASE("inconsistent k without an expected dimension") {
    const auto p = write_file("v.txt", "north 0.1 0.2 0.3\nsouth 0.1 0.2\n");
    CHECK_THROWS_AS(EmbeddingTable::load(p), FormatError);
  }
  SUBCASE("duplicates keep the first occurrence") {
    const auto p = write_file("v.txt", "north 1 2\nnorth 3 4\neast 5 6\n");
    const auto t = EmbeddingTable::load(p);
    CHECK(t.vocab_size() == 2);
    CHECK(t.row(*t.find("north"))(0) == 1.0);
  }
  SUBCASE("empty file") {
    const auto p = write_file("v.txt", "");
    CHECK_THROWS_AS(EmbeddingTable::load(p), FormatError);
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("I am LOOKING", Origin::user_hypothesis).tokens == std::vector<std::string>{"i", "am", "looking"});
  CHECK(tokenize("", Origin::user_hypothesis).tokens.empty());
  CHECK(tokenize("moderately priced restaurant", Origin::user_hypothesis).tokens.size() == 3);
  CHECK(tokenize("  two\tspaces  ", Origin::system_act).origin == Origin::system_act);
}

TEST_CASE("encode system act") {
  CHECK(encode_system_act({"welcomemsg", {}}).tokens == std::vector<std::string>{"welcomemsg"});
  CHECK(encode_system_act({"offer", {{"name", "meghna"}}}).tokens ==
        std::vector<std::string>{"offer", "name", "meghna"});
  const auto s = encode_system_act({"inform", {{"pricerange", "moderate"}, {"area", "north"}}});
  CHECK(s.tokens == std::vector<std::string>{"inform", "pricerange", "moderate", "area", "north"});
  CHECK(s.origin == Origin::system_act);
  CHECK(encode_system_act({"offer", {{"name", "golden wok"}}}).tokens ==
        std::vector<std::string>{"offer", "name", "golden", "wok"});

  // Acts that differ in any slot or value flatten differently.
  CHECK(encode_system_act({"inform", {{"area", "north"}}}).tokens !=
        encode_system_act({"inform", {{"area", "south"}}}).tokens);
  CHECK(encode_system_act({"inform", {{"area", "north"}}}).tokens !=
        encode_system_act({"inform", {{"food", "north"}}}).tokens);
}

TEST_CASE("lookup") {
  EmbeddingTable t(3, 9);
  VectorD v(3);
  v << 1, 2, 3;
  const int north = t.add_row("north", v, false);
  const int inform = t.add_row("inform", v * 2, true);

  const auto a = t.lookup({{"north", "zxqv", "qqq"}, Origin::user_hypothesis});
  CHECK(a.vectors.rows() == 3);
  CHECK(a.vectors.row(0).transpose() == v);
  CHECK(a.rows[1] == t.oov_row());
  CHECK(a.rows[2] == t.oov_row());
  CHECK(a.vectors.row(1) == a.vectors.row(2));
  CHECK(a.rows[0] == north);

  const auto u = t.lookup({{"inform"}, Origin::user_hypothesis});
  CHECK_FALSE(u.trainable[0]);
  const auto s = t.lookup({{"inform", "north"}, Origin::system_act});
  CHECK(s.trainable[0]);
  CHECK_FALSE(s.trainable[1]);
  CHECK(s.rows[0] == inform);

  const auto e = t.lookup({{}, Origin::user_hypothesis});
  CHECK(e.vectors.rows() == 0);
  CHECK(e.vectors.cols() == 3);

  CHECK(t.lookup({{"north"}, Origin::user_hypothesis}).vectors ==
        t.lookup({{"north"}, Origin::user_hypothesis}).vectors);
}

TEST_CASE("OOV row is seeded and bounded") {
  EmbeddingTable a(50, 4), b(50, 4), c(50, 5);
  CHECK(a.row(a.oov_row()) == b.row(b.oov_row()));
  CHECK(a.row(a.oov_row()) != c.row(c.oov_row()));
  CHECK(a.row(a.oov_row()).cwiseAbs().maxCoeff() <= 0.1);
  CHECK_FALSE(a.find(kOovToken).has_value());
}

TEST_CASE("prepare for training") {
  EmbeddingTable t(4, 1);
  t.add_row("north", VectorD::Ones(4), false);
  t.add_row("hello", VectorD::Ones(4), false);
  std::mt19937_64 rng(1);
  prepare_for_training(t, {"inform", "area", "north", "reqalts"}, rng);
  CHECK(t.trainable(*t.find("north")));
  CHECK_FALSE(t.trainable(*t.find("hello")));
  CHECK(t.find("inform").has_value());
  CHECK(t.trainable(*t.find("reqalts")));
  CHECK(t.trainable(t.oov_row()));
  CHECK(t.vocab_size() == 5);
}
