#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qa {

struct date {
  int year = 0;
  std::optional<int> month;  // 1-12
  std::optional<int> day;    // 1-31, only valid with month

  bool operator==(const date&) const = default;
};

bool date_valid(const date& d);

/// Total order for comparisons: missing month reads as June, missing day as
/// the 15th, so partially specified dates sort near the midpoint.
std::array<int, 3> date_key(const date& d);

std::string date_to_string(const date& d);
std::optional<date> date_from_string(std::string_view text);

struct number_value {
  double value = 0.0;
  std::string unit;  // empty when absent

  bool operator==(const number_value&) const = default;
};

struct span_range {
  std::size_t begin = 0;  // code point offsets, begin < end
  std::size_t end = 0;

  bool operator==(const span_range&) const = default;
};

enum class mention_kind { name, event, noun_phrase, number, ordinal, date };

const char* mention_kind_name(mention_kind kind);
std::optional<mention_kind> mention_kind_from(std::string_view name);

struct mention_link {
  span_range target;
  std::string role;  // e.g. "agent"

  bool operator==(const mention_link&) const = default;
};

struct mention {
  span_range span;
  std::string surface;  // must equal the paragraph text slice
  mention_kind kind = mention_kind::noun_phrase;
  std::optional<number_value> number;
  std::vector<date> dates;
  std::optional<mention_link> link;

  bool operator==(const mention&) const = default;
};

struct annotated_paragraph {
  std::string id;
  std::string text;
  std::vector<span_range> sentences;  // disjoint, sorted, derived from text
  std::vector<mention> mentions;

  bool operator==(const annotated_paragraph&) const = default;
};

/// Sentence boundaries: '.', '!' or '?' followed by whitespace and an
/// uppercase ASCII letter, or end of text.
std::vector<span_range> split_sentences(std::string_view text);

/// Index of the sentence containing the span start; -1 when uncovered.
int sentence_of(const annotated_paragraph& para, const span_range& span);

/// Builds a paragraph from raw parts: computes sentences and fills each
/// mention surface from its span.
annotated_paragraph make_paragraph(std::string id, std::string text,
                                   std::vector<mention> mentions);

/// All invariant violations, not just the first. Empty result means valid.
std::vector<std::string> validate_paragraph(const annotated_paragraph& para);

std::vector<annotated_paragraph> load_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<annotated_paragraph>& corpus);

/// Deterministic fallback annotator: digit/number patterns, month-name and
/// bare-year dates, capitalized-run names, stopword-delimited noun phrases,
/// a fixed ordinal lexicon, and event tags for noun phrases in dated
/// sentences. A substitute for running a full NLP pipeline.
std::vector<mention> annotate_rule_based(std::string_view text);

/// Mentions of one paragraph grouped by kind, each list sorted by span.
struct entity_catalog {
  std::map<mention_kind, std::vector<const mention*>> by_kind;

  const std::vector<const mention*>* of(mention_kind kind) const {
    auto it = by_kind.find(kind);
    return it == by_kind.end() ? nullptr : &it->second;
  }
};

entity_catalog catalog(const annotated_paragraph& para);

/// Tokens whose lowercase form marks a unit when it follows a number.
const std::vector<std::string>& unit_lexicon();

}  // namespace qa
