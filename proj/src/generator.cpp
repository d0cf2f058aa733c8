#include "qa/generator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qa/errors.hpp"
#include "qa/interpreter.hpp"
#include "qa/text.hpp"

namespace qa {

std::vector<pattern_part> parse_pattern(std::string_view pattern) {
  std::vector<pattern_part> parts;
  std::string literal;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '<') {
      literal += pattern[i++];
      continue;
    }
    std::size_t close = pattern.find('>', i);
    std::size_t colon = pattern.find(':', i);
    if (close == std::string_view::npos || colon == std::string_view::npos || colon > close) {
      literal += pattern[i++];
      continue;
    }
    std::string_view kind_text = pattern.substr(i + 1, colon - i - 1);
    std::string_view index_text = pattern.substr(colon + 1, close - colon - 1);
    auto kind = mention_kind_from(kind_text);
    bool digits = !index_text.empty() &&
                  std::all_of(index_text.begin(), index_text.end(),
                              [](unsigned char c) { return std::isdigit(c) != 0; });
    if (!kind || !digits) {
      literal += pattern[i++];
      continue;
    }
    if (!literal.empty()) {
      parts.emplace_back(std::move(literal));
      literal.clear();
    }
    parts.emplace_back(slot_ref{*kind, std::stoi(std::string(index_text))});
    i = close + 1;
  }
  if (!literal.empty()) parts.emplace_back(std::move(literal));
  return parts;
}

namespace {

std::vector<slot_ref> slots_of(const std::vector<pattern_part>& parts) {
  std::vector<slot_ref> slots;
  for (const auto& part : parts)
    if (const auto* slot = std::get_if<slot_ref>(&part)) slots.push_back(*slot);
  std::sort(slots.begin(), slots.end(),
            [](const slot_ref& a, const slot_ref& b) { return a.index < b.index; });
  return slots;
}

void validate_template(question_template& tmpl) {
  if (tmpl.prefix.empty() || tmpl.pattern.empty())
    fail(errc::format_error, tmpl.id + ": prefix and pattern are required");
  std::string pattern_lower = lower_ascii(tmpl.pattern);
  std::string prefix_lower = lower_ascii(tmpl.prefix);
  if (pattern_lower.rfind(prefix_lower, 0) != 0)
    fail(errc::format_error, tmpl.id + ": pattern does not start with prefix");

  tmpl.parts = parse_pattern(tmpl.pattern);
  tmpl.slots = slots_of(tmpl.parts);
  for (std::size_t i = 0; i < tmpl.slots.size(); ++i) {
    if (tmpl.slots[i].index != static_cast<int>(i) + 1)
      fail(errc::format_error,
           tmpl.id + ": slot indices must be 1.." + std::to_string(tmpl.slots.size()) +
               ", each exactly once");
  }

  try {
    type_check(tmpl.skeleton);
  } catch (const error& e) {
    fail(errc::invalid_skeleton, tmpl.id + ": " + e.what());
  }
  if (!is_skeleton(tmpl.skeleton))
    fail(errc::invalid_skeleton, tmpl.id + ": skeleton carries arguments");

  std::set<std::string> seen_paths;
  for (const auto& [path, arg_pattern] : tmpl.arg_patterns) {
    if (!seen_paths.insert(path).second)
      fail(errc::format_error, tmpl.id + ": duplicate arg path '" + path + "'");
    const action_program* node = node_at(tmpl.skeleton, path);
    if (node == nullptr)
      fail(errc::format_error, tmpl.id + ": no node at path '" + path + "'");
    if (!node->kind->takes_phrase_argument)
      fail(errc::format_error,
           tmpl.id + ": node '" + node->kind->name + "' takes no phrase argument");
    for (const auto& part : parse_pattern(arg_pattern)) {
      if (const auto* slot = std::get_if<slot_ref>(&part)) {
        bool known = std::any_of(tmpl.slots.begin(), tmpl.slots.end(),
                                 [&](const slot_ref& s) { return s.index == slot->index; });
        if (!known)
          fail(errc::unknown_slot_reference,
               tmpl.id + ": argument at '" + path + "' references slot " +
                   std::to_string(slot->index));
      }
    }
  }
}

}  // namespace

std::vector<question_template> load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open " + path);

  std::vector<question_template> templates;
  std::unordered_set<std::string> seen_ids;
  question_template current;
  bool in_record = false;

  auto field_after = [](const std::string& line, std::string_view key) {
    return line.substr(key.size());
  };

  auto finish = [&]() {
    if (!in_record) return;
    validate_template(current);
    templates.push_back(std::move(current));
    current = {};
    in_record = false;
  };

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    auto where = [&] { return "line " + std::to_string(line_number) + ": "; };
    if (line.rfind("#TEMPLATE ", 0) == 0) {
      finish();
      in_record = true;
      current.id = line.substr(10);
      if (current.id.empty()) fail(errc::format_error, where() + "empty template id");
      if (!seen_ids.insert(current.id).second)
        fail(errc::format_error, where() + "duplicate template id " + current.id);
      continue;
    }
    if (!in_record) fail(errc::format_error, where() + "content outside record");
    if (line.rfind("prefix: ", 0) == 0) {
      current.prefix = field_after(line, "prefix: ");
    } else if (line.rfind("pattern: ", 0) == 0) {
      current.pattern = field_after(line, "pattern: ");
    } else if (line.rfind("skeleton: ", 0) == 0) {
      try {
        current.skeleton = parse_program(field_after(line, "skeleton: "));
      } catch (const error& e) {
        fail(errc::invalid_skeleton, where() + e.what());
      }
    } else if (line.rfind("arg ", 0) == 0) {
      std::size_t colon = line.find(": ", 4);
      if (colon == std::string::npos) fail(errc::format_error, where() + "bad arg line");
      current.arg_patterns.emplace_back(line.substr(4, colon - 4), line.substr(colon + 2));
    } else {
      fail(errc::format_error, where() + "unknown field");
    }
  }
  finish();
  if (templates.empty()) fail(errc::format_error, "no templates in " + path);
  return templates;
}

std::string substitute_slots(std::string_view pattern,
                             const std::map<int, std::string>& fills) {
  std::string out;
  for (const auto& part : parse_pattern(pattern)) {
    if (const auto* literal = std::get_if<std::string>(&part)) {
      out += *literal;
    } else {
      const auto& slot = std::get<slot_ref>(part);
      auto it = fills.find(slot.index);
      if (it == fills.end())
        fail(errc::unknown_slot_reference, "no fill for slot " + std::to_string(slot.index));
      out += it->second;
    }
  }
  return out;
}

synthetic_example instantiate(const question_template& tmpl, const annotated_paragraph& para,
                              rng& random) {
  const entity_catalog cat = catalog(para);

  std::map<int, mention> fills;
  std::map<mention_kind, std::vector<const mention*>> pools;  // without-replacement state
  for (const auto& slot : tmpl.slots) {
    auto [it, fresh] = pools.try_emplace(slot.kind);
    if (fresh) {
      const auto* list = cat.of(slot.kind);
      if (list != nullptr) it->second = *list;
    }
    auto& pool = it->second;
    if (pool.empty())
      throw error(errc::slot_unfillable,
                  std::string(mention_kind_name(slot.kind)) + " in " + para.id);
    std::size_t pick = random.below(pool.size());
    fills.emplace(slot.index, *pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::map<int, std::string> surfaces;
  for (const auto& [index, m] : fills) surfaces.emplace(index, m.surface);

  synthetic_example ex;
  ex.question = substitute_slots(tmpl.pattern, surfaces);
  ex.program = tmpl.skeleton;
  for (const auto& [path, arg_pattern] : tmpl.arg_patterns) {
    action_program* node = node_at(ex.program, path);
    node->argument = substitute_slots(arg_pattern, surfaces);
  }
  ex.paragraph_id = para.id;
  ex.slot_fills = std::move(fills);
  type_check(ex.program);
  return ex;
}

std::vector<synthetic_example> generate_dataset(const std::vector<question_template>& templates,
                                                const std::vector<annotated_paragraph>& corpus,
                                                std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(errc::empty_input, "n must be >= 1");
  if (templates.empty() || corpus.empty())
    fail(errc::empty_input, "need at least one template and one paragraph");

  rng random(seed);
  std::vector<synthetic_example> out;
  out.reserve(n);
  const std::size_t attempt_limit = 1000 * n;
  std::size_t consecutive_failures = 0;

  for (std::size_t k = 0; k < n; ++k) {
    const question_template& tmpl = templates[k % templates.size()];
    for (;;) {
      if (consecutive_failures >= attempt_limit)
        fail(errc::exhausted_after_retries,
             "gave up after " + std::to_string(attempt_limit) + " consecutive failed attempts");
      const annotated_paragraph& para = corpus[random.below(corpus.size())];
      try {
        out.push_back(instantiate(tmpl, para, random));
        consecutive_failures = 0;
        break;
      } catch (const error& e) {
        if (e.code() != errc::slot_unfillable) throw;
        ++consecutive_failures;
      }
    }
  }
  return out;
}

gold_result with_gold_answers(std::vector<synthetic_example> dataset,
                              const std::vector<annotated_paragraph>& corpus) {
  std::unordered_map<std::string, const annotated_paragraph*> by_id;
  for (const auto& para : corpus) by_id.emplace(para.id, &para);

  gold_result result;
  result.kept.reserve(dataset.size());
  for (auto& ex : dataset) {
    auto it = by_id.find(ex.paragraph_id);
    if (it == by_id.end()) {
      ++result.dropped;
      continue;
    }
    try {
      auto [ans, trace] = execute(ex.program, *it->second);
      ex.gold_answer = ans.text;
      result.kept.push_back(std::move(ex));
    } catch (const error&) {
      ++result.dropped;
    }
  }
  return result;
}

void write_dataset(const std::string& path, const std::vector<synthetic_example>& dataset) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot write " + path);
  for (const auto& ex : dataset) {
    out << ex.question << "\t" << serialize_program(ex.program) << "\t" << ex.paragraph_id
        << "\t" << ex.gold_answer << "\n";
  }
}

std::vector<synthetic_example> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open " + path);
  std::vector<synthetic_example> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      std::size_t tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() != 4)
      fail(errc::format_error,
           "line " + std::to_string(line_number) + ": expected 4 tab-separated columns");
    synthetic_example ex;
    ex.question = cols[0];
    ex.program = parse_program(cols[1]);
    ex.paragraph_id = cols[2];
    ex.gold_answer = cols[3];
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace qa
