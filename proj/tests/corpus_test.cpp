#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qa/corpus.hpp"
#include "qa/errors.hpp"
#include "qa/text.hpp"
#include "test_support.hpp"

using namespace qa;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "qa_corpus_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const mention* find_mention(const std::vector<mention>& mentions, const std::string& surface,
                            mention_kind kind) {
  for (const auto& m : mentions)
    if (m.kind == kind && m.surface == surface) return &m;
  return nullptr;
}

}  // namespace

TEST_CASE("fixture corpus loads and validates") {
  auto corpus = load_corpus(qa_test::data_path("corpus.txt"));
  CHECK(corpus.size() >= 20);
  for (const auto& para : corpus) {
    CAPTURE(para.id);
    CHECK(validate_paragraph(para).empty());
    CHECK_FALSE(para.sentences.empty());
  }
}

TEST_CASE("corpus write and reload round trips") {
  auto corpus = load_corpus(qa_test::data_path("corpus.txt"));
  auto path = temp_file("roundtrip.txt");
  write_corpus(path.string(), corpus);
  auto reloaded = load_corpus(path.string());
  CHECK(reloaded == corpus);
}

TEST_CASE("corpus format errors are reported") {
  auto path = temp_file("bad.txt");
  {
    std::ofstream out(path);
    out << "#PARA a\nSome text here.\n\n#PARA a\nMore text here.\n";
  }
  CHECK_THROWS_WITH_AS(load_corpus(path.string()), doctest::Contains("duplicate"), error);

  {
    std::ofstream out(path);
    out << "#PARA a\nShort.\n#MENTION 2:99 kind=name\n";
  }
  try {
    load_corpus(path.string());
    FAIL("expected validation error");
  } catch (const error& e) {
    CHECK(e.code() == errc::validation_error);
  }
}

TEST_CASE("validate_paragraph returns every violation") {
  annotated_paragraph para = make_paragraph("x", "Rackers kicked the ball.", {});
  mention bad;
  bad.span = {0, 3};
  bad.surface = "foo";  // slice is "Rac"
  bad.kind = mention_kind::name;
  para.mentions.push_back(bad);

  mention bad_date;
  bad_date.span = {0, 7};
  bad_date.surface = "Rackers";
  bad_date.kind = mention_kind::date;
  bad_date.dates.push_back(date{2001, std::nullopt, 5});  // day without month
  para.mentions.push_back(bad_date);

  auto violations = validate_paragraph(para);
  REQUIRE(violations.size() == 2);
  CHECK(violations[0].find("SurfaceMismatch") != std::string::npos);
  CHECK(violations[1].find("InvalidDate") != std::string::npos);
}

TEST_CASE("date validity covers calendar rules") {
  CHECK(date_valid(date{2000, 2, 29}));        // leap year
  CHECK_FALSE(date_valid(date{1900, 2, 29}));  // century non-leap
  CHECK_FALSE(date_valid(date{2001, std::nullopt, 5}));
  CHECK_FALSE(date_valid(date{2001, 13, std::nullopt}));
  CHECK_FALSE(date_valid(date{2001, 4, 31}));
  CHECK(date_valid(date{2001, std::nullopt, std::nullopt}));
  CHECK(date_key(date{2001, std::nullopt, std::nullopt}) == std::array<int, 3>{2001, 6, 15});
}

TEST_CASE("sentence splitting needs terminator plus capital") {
  auto s = split_sentences("He ran far. Then he stopped.");
  REQUIRE(s.size() == 2);
  auto one = split_sentences("He ran far. then he stopped.");
  CHECK(one.size() == 1);
  auto trailing = split_sentences("No terminator here");
  REQUIRE(trailing.size() == 1);
  CHECK(trailing[0].begin == 0);
}

TEST_CASE("rule-based annotator finds numbers, names and ordinals") {
  auto mentions = annotate_rule_based("Rackers kicked a 42-yard field goal in the first quarter.");

  const mention* number = find_mention(mentions, "42-yard", mention_kind::number);
  REQUIRE(number != nullptr);
  CHECK(number->number->value == doctest::Approx(42.0));
  CHECK(number->number->unit == "yard");

  CHECK(find_mention(mentions, "Rackers", mention_kind::name) != nullptr);
  CHECK(find_mention(mentions, "first", mention_kind::ordinal) != nullptr);
  CHECK(find_mention(mentions, "42-yard field goal", mention_kind::noun_phrase) != nullptr);
}

TEST_CASE("rule-based annotator reads month-name dates") {
  auto mentions = annotate_rule_based("The treaty was signed in December 1948.");
  const mention* d = find_mention(mentions, "December 1948", mention_kind::date);
  REQUIRE(d != nullptr);
  REQUIRE(d->dates.size() == 1);
  CHECK(d->dates[0] == date{1948, 12, std::nullopt});

  auto with_day = annotate_rule_based("It happened on January 5, 1999 at dawn.");
  const mention* full = find_mention(with_day, "January 5, 1999", mention_kind::date);
  REQUIRE(full != nullptr);
  CHECK(full->dates[0] == date{1999, 1, 5});

  // bare years in range become dates; a sentence with a date tags its noun
  // phrases as events too
  auto bare = annotate_rule_based("The siege ended in 1669.");
  CHECK(find_mention(bare, "1669", mention_kind::date) != nullptr);
  CHECK(find_mention(bare, "siege ended", mention_kind::event) != nullptr);
}

TEST_CASE("stopword-only text yields no mentions") {
  CHECK(annotate_rule_based("the of and").empty());
}

TEST_CASE("annotator is deterministic and per-kind non-overlapping") {
  const std::string text =
      "Rackers kicked a 42-yard field goal in the first quarter. The treaty was signed in "
      "December 1948. Aaron Rodgers threw for 311 yards.";
  auto a = annotate_rule_based(text);
  auto b = annotate_rule_based(text);
  CHECK(a == b);

  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (a[i].kind != a[j].kind) continue;
      bool disjoint = a[i].span.end <= a[j].span.begin || a[j].span.end <= a[i].span.begin;
      CAPTURE(a[i].surface);
      CAPTURE(a[j].surface);
      CHECK(disjoint);
    }
  }

  CHECK(find_mention(a, "Aaron Rodgers", mention_kind::name) != nullptr);
}

TEST_CASE("catalog groups by kind and sorts by span") {
  auto corpus = load_corpus(qa_test::data_path("corpus.txt"));
  const auto* p02 = &corpus[1];
  REQUIRE(p02->id == "p02");
  auto cat = catalog(*p02);
  REQUIRE(cat.of(mention_kind::name) != nullptr);
  CHECK(cat.of(mention_kind::name)->size() == 4);
  CHECK(cat.of(mention_kind::ordinal)->size() == 3);
  CHECK(cat.of(mention_kind::event) == nullptr);
  const auto& names = *cat.of(mention_kind::name);
  for (std::size_t i = 1; i < names.size(); ++i)
    CHECK(names[i - 1]->span.begin <= names[i]->span.begin);
  for (const auto& [kind, list] : cat.by_kind)
    for (const auto* m : list) CHECK(m->surface == cp_slice(p02->text, m->span.begin, m->span.end));
}

TEST_CASE("empty mention list gives an empty catalog") {
  auto para = make_paragraph("e", "Nothing is annotated here.", {});
  CHECK(catalog(para).by_kind.empty());
}
