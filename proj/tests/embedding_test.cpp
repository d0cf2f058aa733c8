#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "qa/embedding.hpp"
#include "qa/errors.hpp"
#include "qa/rng.hpp"
#include "qa/text.hpp"
#include "test_support.hpp"

using namespace qa;

namespace {

vector_table tiny_table() {
  vector_table t;
  t.dim = 2;
  t.entries["touchdown"] = {1.0, 0.0};
  t.entries["scored"] = {0.0, 1.0};
  return t;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and strips edge punctuation") {
  CHECK(tokenize("What happened first, the crisis?") ==
        std::vector<std::string>{"what", "happened", "first", "the", "crisis"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("42-yard") == std::vector<std::string>{"42-yard"});
  CHECK(tokenize("  ...  ").empty());
}

TEST_CASE("stopword list is the fixed 40-entry table") {
  CHECK(stopwords().size() == 40);
  CHECK(is_stopword("the"));
  CHECK(is_stopword("of"));
  CHECK(is_stopword("and"));
  CHECK_FALSE(is_stopword("touchdowns"));
  CHECK(content_tokens("the formation of the United Nations") ==
        std::vector<std::string>{"formation", "united", "nations"});
}

TEST_CASE("embed averages known token vectors") {
  auto table = tiny_table();
  auto v = embed(table, "touchdown scored");
  CHECK(v.known_token_count == 2);
  CHECK(v.values[0] == doctest::Approx(0.5));
  CHECK(v.values[1] == doctest::Approx(0.5));

  auto single = embed(table, "touchdown blocked");
  CHECK(single.known_token_count == 1);
  CHECK(single.values[0] == doctest::Approx(1.0));
  CHECK(single.values[1] == doctest::Approx(0.0));
}

TEST_CASE("embed falls back to a deterministic unit-norm hash") {
  auto table = tiny_table();
  auto a = embed(table, "zzz qqq www");
  auto b = embed(table, "zzz qqq www");
  CHECK(a.known_token_count == 0);
  CHECK(a.values == b.values);
  double norm = 0.0;
  for (double x : a.values) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("embed is a bag of tokens") {
  auto table = tiny_table();
  rng random(7);
  std::vector<std::string> known = {"touchdown", "scored", "blocked"};
  std::vector<std::string> unknown = {"zzz", "qqq", "www", "kkk"};
  for (int i = 0; i < 50; ++i) {
    auto tokens = i % 2 == 0 ? known : unknown;
    auto base = embed(table, join(tokens));
    random.shuffle(tokens);
    auto permuted = embed(table, join(tokens));
    CHECK(base.values == permuted.values);
  }
}

TEST_CASE("cosine matches hand arithmetic") {
  std::vector<double> e1 = {1.0, 0.0};
  std::vector<double> e2 = {0.0, 1.0};
  std::vector<double> diag = {1.0, 1.0};
  CHECK(cosine(diag, diag) == doctest::Approx(1.0));
  CHECK(cosine(e1, e2) == doctest::Approx(0.0));
  CHECK(cosine(e1, diag) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));

  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS((void)cosine(e1, zero), error);
}

TEST_CASE("cosine is symmetric") {
  rng random(11);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> u(8), v(8);
    for (auto& x : u) x = static_cast<double>(random.below(2000)) / 1000.0 - 1.0 + 1e-3;
    for (auto& x : v) x = static_cast<double>(random.below(2000)) / 1000.0 - 1.0 + 1e-3;
    CHECK(std::abs(cosine(u, v) - cosine(v, u)) <= 1e-12);
  }
}

TEST_CASE("scaling the table leaves cosine rankings unchanged") {
  auto table = load_vector_table(qa_test::data_path("vectors.txt"));
  vector_table scaled = table;
  for (auto& [token, values] : scaled.entries)
    for (double& v : values) v *= 3.5;

  const std::vector<std::string> questions = {
      "How many touchdowns were scored?",
      "Which happened earlier, the oil crisis or the energy crisis?",
      "Who kicked a 42-yard field goal in the first quarter?",
  };
  for (const auto& base_q : questions) {
    auto qv = embed(table, base_q);
    auto qv_scaled = embed(scaled, base_q);
    for (const auto& other : questions) {
      auto ov = embed(table, other);
      auto ov_scaled = embed(scaled, other);
      CHECK(cosine(qv.values, ov.values) ==
            doctest::Approx(cosine(qv_scaled.values, ov_scaled.values)).epsilon(1e-12));
    }
  }
}

TEST_CASE("vector tables survive a write and reload") {
  vector_table table = tiny_table();
  auto dir = std::filesystem::temp_directory_path() / "qa_embedding_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "vectors.txt").string();
  write_vector_table(path, table);
  auto reloaded = load_vector_table(path);
  CHECK(reloaded.dim == table.dim);
  CHECK(reloaded.entries == table.entries);
}

TEST_CASE("fixture vector table loads with the declared dimension") {
  auto table = load_vector_table(qa_test::data_path("vectors.txt"));
  CHECK(table.dim == 64);
  CHECK(table.entries.count("touchdowns") == 1);
  for (const auto& [token, values] : table.entries) {
    CHECK(values.size() == table.dim);
    CHECK(token == lower_ascii(token));
  }
}
