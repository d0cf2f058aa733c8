#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qa/action_dsl.hpp"
#include "qa/corpus.hpp"
#include "qa/rng.hpp"

namespace qa {

struct slot_ref {
  mention_kind kind = mention_kind::noun_phrase;
  int index = 0;  // 1-based, unique within a template

  bool operator==(const slot_ref&) const = default;
};

/// Pattern text split into literal pieces and typed "<kind:i>" slots.
using pattern_part = std::variant<std::string, slot_ref>;

std::vector<pattern_part> parse_pattern(std::string_view pattern);

struct question_template {
  std::string id;
  std::string prefix;   // the first n-gram; pattern starts with it (case-insensitive)
  std::string pattern;  // question text with slots
  action_program skeleton;
  // node path ("." = root) -> argument pattern, applied in file order
  std::vector<std::pair<std::string, std::string>> arg_patterns;
  std::vector<pattern_part> parts;
  std::vector<slot_ref> slots;  // sorted by index
};

std::vector<question_template> load_templates(const std::string& path);

struct synthetic_example {
  std::string question;
  action_program program;
  std::string paragraph_id;
  std::map<int, mention> slot_fills;  // runtime only, not serialized
  std::string gold_answer;            // empty when not yet computed
};

/// Fills every slot with a uniformly sampled mention of the right kind,
/// without replacement within a kind. Throws slot_unfillable when the
/// paragraph lacks fillers.
synthetic_example instantiate(const question_template& tmpl, const annotated_paragraph& para,
                              rng& random);

/// Round-robin over templates, uniform over paragraphs; pairs that cannot be
/// filled are skipped. Deterministic for a fixed seed. Gives up after
/// 1000 * n consecutive failed attempts.
std::vector<synthetic_example> generate_dataset(const std::vector<question_template>& templates,
                                                const std::vector<annotated_paragraph>& corpus,
                                                std::size_t n, std::uint64_t seed);

struct gold_result {
  std::vector<synthetic_example> kept;
  std::size_t dropped = 0;
};

/// Executes each example's program on its source paragraph and records the
/// answer; examples whose execution fails are dropped.
gold_result with_gold_answers(std::vector<synthetic_example> dataset,
                              const std::vector<annotated_paragraph>& corpus);

/// Tab-separated: question, program, paragraph id, gold answer (may be empty).
void write_dataset(const std::string& path, const std::vector<synthetic_example>& dataset);
std::vector<synthetic_example> load_dataset(const std::string& path);

std::string substitute_slots(std::string_view pattern,
                             const std::map<int, std::string>& fills);

}  // namespace qa
