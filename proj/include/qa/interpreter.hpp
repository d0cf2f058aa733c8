#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qa/action_dsl.hpp"
#include "qa/corpus.hpp"

namespace qa {

// Discrete stand-in for attention: score-ranked mention sets with inclusive
// thresholds. Scoring is over a mention's sentence window.
inline constexpr double find_threshold = 0.5;
inline constexpr double filter_threshold = 0.5;

struct attn_entry {
  span_range span;
  std::string surface;
  std::optional<number_value> number;
  std::vector<date> dates;
  std::optional<mention_link> link;
  double score = 0.0;  // in (0, 1]
};

using pattn = std::vector<attn_entry>;  // sorted by descending score, ties by span start

struct dated_mention {
  date when;
  attn_entry source;
};

using date_set = std::vector<dated_mention>;  // same ordering as pattn

struct count_result {
  long value = 0;
};

struct number_result {
  double value = 0.0;
  std::string unit;  // empty when absent
};

struct span_result {
  std::string text;
  span_range span;
};

using exec_value = std::variant<pattn, date_set, count_result, number_result, span_result>;

enum class answer_kind { span, number, date_span };

struct answer {
  answer_kind kind = answer_kind::span;
  std::string text;
};

struct trace_node {
  std::string path;    // "." for the root, "0/1" style below
  std::string action;  // action name plus argument when present
  std::string inputs;  // child output summaries
  std::string output;  // output summary
};

using exec_trace = std::vector<trace_node>;  // one entry per node, pre-order

std::string summarize(const exec_value& value);

pattn exec_find(std::string_view phrase, const annotated_paragraph& para);
pattn exec_filter(std::string_view phrase, const pattn& input, const annotated_paragraph& para);
pattn exec_relocate(std::string_view phrase, const pattn& input, const annotated_paragraph& para);
count_result exec_count(const pattn& input);
pattn exec_max(const pattn& input);
pattn exec_min(const pattn& input);
number_result exec_find_num(const pattn& input);
date_set exec_find_date(std::string_view phrase, const annotated_paragraph& para);
number_result exec_year_difference(const date_set& a, const date_set& b);
number_result exec_year_diff_single_event(const date_set& a);
pattn exec_compare_date(const date_set& a, const date_set& b, bool lesser);
span_result exec_find_span(const pattn& input);

answer render_answer(const exec_value& value);

/// Post-order evaluation against one paragraph. The program must type-check
/// and every phrase-taking node must carry an argument.
std::pair<answer, exec_trace> execute(const action_program& program,
                                      const annotated_paragraph& para);

}  // namespace qa
