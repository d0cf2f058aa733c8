#include "qa/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_set>

#include "qa/errors.hpp"
#include "qa/text.hpp"

namespace qa {

namespace {

std::string format_decimal(double value) {
  if (value == static_cast<long long>(value) && std::abs(value) < 1e15)
    return std::to_string(static_cast<long long>(value));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::vector<std::unordered_set<std::string>> sentence_token_sets(
    const annotated_paragraph& para) {
  std::vector<std::unordered_set<std::string>> sets;
  sets.reserve(para.sentences.size());
  for (const auto& s : para.sentences) {
    auto tokens = tokenize(cp_slice(para.text, s.begin, s.end));
    sets.emplace_back(tokens.begin(), tokens.end());
  }
  return sets;
}

attn_entry entry_from(const mention& m, double score) {
  return {m.span, m.surface, m.number, m.dates, m.link, score};
}

void sort_entries(pattn& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const attn_entry& a, const attn_entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    return a.span.end < b.span.end;
  });
}

double overlap_score(const std::vector<std::string>& phrase_tokens,
                     const std::unordered_set<std::string>& sentence_tokens,
                     const std::vector<std::string>& surface_tokens) {
  std::size_t hit = 0;
  for (const auto& tok : phrase_tokens) {
    if (sentence_tokens.count(tok) ||
        std::find(surface_tokens.begin(), surface_tokens.end(), tok) != surface_tokens.end())
      ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(phrase_tokens.size());
}

}  // namespace

std::string summarize(const exec_value& value) {
  struct visitor {
    std::string operator()(const pattn& v) const {
      std::string s = "pattn[" + std::to_string(v.size()) + "]";
      if (!v.empty()) s += " top='" + v.front().surface + "'";
      return s;
    }
    std::string operator()(const date_set& v) const {
      std::string s = "dates[" + std::to_string(v.size()) + "]";
      if (!v.empty()) s += " top=" + date_to_string(v.front().when);
      return s;
    }
    std::string operator()(const count_result& v) const {
      return "count " + std::to_string(v.value);
    }
    std::string operator()(const number_result& v) const {
      std::string s = "number " + format_decimal(v.value);
      if (!v.unit.empty()) s += " " + v.unit;
      return s;
    }
    std::string operator()(const span_result& v) const { return "span '" + v.text + "'"; }
  };
  return std::visit(visitor{}, value);
}

pattn exec_find(std::string_view phrase, const annotated_paragraph& para) {
  const auto phrase_tokens = content_tokens(phrase);
  if (phrase_tokens.empty()) fail(errc::empty_result, "find phrase has no content tokens");
  const auto sets = sentence_token_sets(para);
  static const std::unordered_set<std::string> no_tokens;

  pattn out;
  for (const auto& m : para.mentions) {
    int s = sentence_of(para, m.span);
    const auto& sentence_tokens = s >= 0 ? sets[static_cast<std::size_t>(s)] : no_tokens;
    double score = overlap_score(phrase_tokens, sentence_tokens, tokenize(m.surface));
    if (score >= find_threshold) out.push_back(entry_from(m, score));
  }
  if (out.empty()) fail(errc::empty_result, "find('" + std::string(phrase) + "') matched nothing");
  sort_entries(out);
  return out;
}

pattn exec_filter(std::string_view phrase, const pattn& input, const annotated_paragraph& para) {
  const auto phrase_tokens = content_tokens(phrase);
  if (phrase_tokens.empty()) fail(errc::empty_result, "filter phrase has no content tokens");
  const auto sets = sentence_token_sets(para);

  pattn out;
  for (const auto& e : input) {
    int s = sentence_of(para, e.span);
    if (s < 0) continue;
    const auto& sentence_tokens = sets[static_cast<std::size_t>(s)];
    std::size_t hit = 0;
    for (const auto& tok : phrase_tokens)
      if (sentence_tokens.count(tok)) ++hit;
    double coverage = static_cast<double>(hit) / static_cast<double>(phrase_tokens.size());
    if (coverage >= filter_threshold) out.push_back(e);
  }
  if (out.empty())
    fail(errc::empty_result, "filter('" + std::string(phrase) + "') removed everything");
  return out;  // subset of a sorted list stays sorted
}

pattn exec_relocate(std::string_view phrase, const pattn& input,
                    const annotated_paragraph& para) {
  const auto tokens = tokenize(phrase);
  std::string role;
  if (!tokens.empty() && tokens.front() == "who") {
    role = "agent";
  } else {
    for (const auto& tok : tokens) {
      if (!is_stopword(tok)) {
        role = tok;
        break;
      }
    }
    if (role.empty() && !tokens.empty()) role = tokens.front();
  }
  if (role.empty()) fail(errc::empty_result, "relocate phrase is empty");

  std::map<std::pair<std::size_t, std::size_t>, attn_entry> by_span;
  for (const auto& e : input) {
    if (!e.link || e.link->role != role) continue;
    attn_entry moved;
    moved.span = e.link->target;
    moved.surface = cp_slice(para.text, moved.span.begin, moved.span.end);
    moved.score = e.score;
    auto key = std::make_pair(moved.span.begin, moved.span.end);
    auto it = by_span.find(key);
    if (it == by_span.end())
      by_span.emplace(key, std::move(moved));
    else if (moved.score > it->second.score)
      it->second.score = moved.score;
  }
  if (by_span.empty())
    fail(errc::empty_result, "relocate('" + std::string(phrase) + "') found no links");
  pattn out;
  out.reserve(by_span.size());
  for (auto& [key, e] : by_span) out.push_back(std::move(e));
  sort_entries(out);
  return out;
}

count_result exec_count(const pattn& input) {
  return {static_cast<long>(input.size())};
}

namespace {

pattn pick_by_number(const pattn& input, bool maximal) {
  const attn_entry* best = nullptr;
  for (const auto& e : input) {
    if (!e.number) continue;
    if (best == nullptr) {
      best = &e;
      continue;
    }
    double v = e.number->value;
    double bv = best->number->value;
    bool better = maximal ? v > bv : v < bv;
    bool tie_earlier = v == bv && e.span.begin < best->span.begin;
    if (better || tie_earlier) best = &e;
  }
  if (best == nullptr) fail(errc::number_unavailable, "no numeric mentions in scope");
  return {*best};
}

}  // namespace

pattn exec_max(const pattn& input) { return pick_by_number(input, true); }

pattn exec_min(const pattn& input) { return pick_by_number(input, false); }

number_result exec_find_num(const pattn& input) {
  for (const auto& e : input)
    if (e.number) return {e.number->value, e.number->unit};
  fail(errc::number_unavailable, "no numeric mention in scope");
}

date_set exec_find_date(std::string_view phrase, const annotated_paragraph& para) {
  pattn base;
  try {
    base = exec_find(phrase, para);
  } catch (const error& e) {
    if (e.code() == errc::empty_result)
      fail(errc::date_unavailable, "find_date('" + std::string(phrase) + "') matched nothing");
    throw;
  }

  std::vector<const mention*> date_mentions;
  for (const auto& m : para.mentions)
    if (m.kind == mention_kind::date) date_mentions.push_back(&m);
  std::stable_sort(date_mentions.begin(), date_mentions.end(),
                   [](const mention* a, const mention* b) {
                     return a->span.begin < b->span.begin;
                   });

  date_set out;
  for (const auto& e : base) {
    // a mention's own dates first, then dated mentions of its sentence in
    // span order
    std::vector<date> collected = e.dates;
    int s = sentence_of(para, e.span);
    if (s >= 0) {
      for (const auto* m : date_mentions) {
        if (sentence_of(para, m->span) != s) continue;
        for (const date& d : m->dates) collected.push_back(d);
      }
    }
    std::vector<date> seen;
    for (const date& d : collected) {
      if (std::find(seen.begin(), seen.end(), d) != seen.end()) continue;
      seen.push_back(d);
      out.push_back({d, e});
    }
  }
  if (out.empty())
    fail(errc::date_unavailable, "find_date('" + std::string(phrase) + "') found no dates");
  return out;  // entry-major order preserves (score desc, span) sorting
}

number_result exec_year_difference(const date_set& a, const date_set& b) {
  if (a.empty() || b.empty()) fail(errc::date_unavailable, "year_difference on empty side");
  long diff = std::labs(static_cast<long>(a.front().when.year) -
                        static_cast<long>(b.front().when.year));
  return {static_cast<double>(diff), "years"};
}

number_result exec_year_diff_single_event(const date_set& a) {
  std::set<int> years;
  for (const auto& d : a) years.insert(d.when.year);
  if (years.size() < 2)
    fail(errc::date_unavailable, "year_diff_single_event needs two distinct years");
  return {static_cast<double>(*years.rbegin() - *years.begin()), "years"};
}

pattn exec_compare_date(const date_set& a, const date_set& b, bool lesser) {
  if (a.empty() || b.empty()) fail(errc::date_unavailable, "compare_date on empty side");
  auto ka = date_key(a.front().when);
  auto kb = date_key(b.front().when);
  bool pick_a = lesser ? ka <= kb : ka >= kb;  // exact tie goes to the first side
  const date_set& side = pick_a ? a : b;

  pattn out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& d : side) {
    auto key = std::make_pair(d.source.span.begin, d.source.span.end);
    if (!seen.insert(key).second) continue;
    out.push_back(d.source);
  }
  return out;
}

span_result exec_find_span(const pattn& input) {
  if (input.empty()) fail(errc::empty_result, "find_span on empty input");
  return {input.front().surface, input.front().span};
}

answer render_answer(const exec_value& value) {
  struct visitor {
    answer operator()(const pattn& v) const {
      if (v.empty()) fail(errc::empty_result, "cannot render an empty mention set");
      return {answer_kind::span, v.front().surface};
    }
    answer operator()(const date_set&) const {
      fail(errc::type_mismatch, "a DATESET root is not renderable");
    }
    answer operator()(const count_result& v) const {
      return {answer_kind::number, std::to_string(v.value)};
    }
    answer operator()(const number_result& v) const {
      std::string text = format_decimal(v.value);
      if (!v.unit.empty()) text += " " + v.unit;
      return {answer_kind::number, text};
    }
    answer operator()(const span_result& v) const { return {answer_kind::span, v.text}; }
  };
  return std::visit(visitor{}, value);
}

namespace {

struct executor {
  const annotated_paragraph& para;
  exec_trace trace;

  const std::string& argument_of(const action_program& node, const std::string& path) {
    if (!node.argument || node.argument->empty())
      fail(errc::missing_argument, node.kind->name + " at " + path + " has no argument");
    return *node.argument;
  }

  exec_value eval(const action_program& node, const std::string& path) {
    const std::size_t slot = trace.size();
    trace.push_back({path, node.kind->name + (node.argument ? "(" + *node.argument + ")" : ""),
                     "", ""});

    std::vector<exec_value> child_values;
    child_values.reserve(node.children.size());
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      std::string child_path = path == "." ? std::to_string(i) : path + "/" + std::to_string(i);
      child_values.push_back(eval(node.children[i], child_path));
    }

    std::string inputs;
    for (std::size_t i = 0; i < child_values.size(); ++i) {
      if (i > 0) inputs += "; ";
      inputs += summarize(child_values[i]);
    }

    exec_value out = apply(node, path, child_values);
    trace[slot].inputs = std::move(inputs);
    trace[slot].output = summarize(out);
    return out;
  }

  exec_value apply(const action_program& node, const std::string& path,
                   std::vector<exec_value>& child_values) {
    const std::string& name = node.kind->name;
    if (name == "find") return exec_find(argument_of(node, path), para);
    if (name == "find_date") return exec_find_date(argument_of(node, path), para);
    if (name == "filter")
      return exec_filter(argument_of(node, path), std::get<pattn>(child_values[0]), para);
    if (name == "relocate")
      return exec_relocate(argument_of(node, path), std::get<pattn>(child_values[0]), para);
    if (name == "count") return exec_count(std::get<pattn>(child_values[0]));
    if (name == "max") return exec_max(std::get<pattn>(child_values[0]));
    if (name == "min") return exec_min(std::get<pattn>(child_values[0]));
    if (name == "find_num") return exec_find_num(std::get<pattn>(child_values[0]));
    if (name == "find_span") return exec_find_span(std::get<pattn>(child_values[0]));
    if (name == "year_difference")
      return exec_year_difference(std::get<date_set>(child_values[0]),
                                  std::get<date_set>(child_values[1]));
    if (name == "year_diff_single_event")
      return exec_year_diff_single_event(std::get<date_set>(child_values[0]));
    if (name == "compare_date_lesser_than")
      return exec_compare_date(std::get<date_set>(child_values[0]),
                               std::get<date_set>(child_values[1]), true);
    if (name == "compare_date_greater_than")
      return exec_compare_date(std::get<date_set>(child_values[0]),
                               std::get<date_set>(child_values[1]), false);
    fail(errc::unknown_action, name);
  }
};

}  // namespace

std::pair<answer, exec_trace> execute(const action_program& program,
                                      const annotated_paragraph& para) {
  type_check(program);
  executor ex{para, {}};
  exec_value root = ex.eval(program, ".");
  return {render_answer(root), std::move(ex.trace)};
}

}  // namespace qa
