#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qa {

enum class value_kind { pattn, dateset, count, number, span };

const char* value_kind_name(value_kind kind);

/// Signature of one reasoning action.
struct action_kind {
  std::string name;
  std::vector<std::string> aliases;
  std::vector<value_kind> child_types;
  value_kind output_type;
  bool takes_phrase_argument = false;

  int arity() const { return static_cast<int>(child_types.size()); }
};

/// The fixed action inventory. Stable order, stable addresses.
const std::vector<action_kind>& registry();

/// Resolves a name or alias; nullptr when unknown.
const action_kind* lookup_action(std::string_view name);

/// A typed program tree. Leaves and phrase-taking inner nodes may carry a
/// free-text argument; children length always equals the action's arity.
struct action_program {
  const action_kind* kind = nullptr;
  std::optional<std::string> argument;
  std::vector<action_program> children;

  bool operator==(const action_program& other) const;
};

/// Grammar: node := NAME [ "(" ARGTEXT ")" ] [ "->" node { "," node } ]
/// The child count after "->" is dictated by NAME's arity, which makes the
/// comma-separated rendering unambiguous without parentheses.
action_program parse_program(std::string_view text);

/// Canonical form: "name(arg) -> child, child". parse(serialize(p)) == p.
std::string serialize_program(const action_program& program);

/// Returns the root output type. Every child output must equal the declared
/// child type and the root must be renderable (everything except DATESET).
value_kind type_check(const action_program& program);

/// Same tree shape with every argument removed.
action_program skeletonize(const action_program& program);

bool is_skeleton(const action_program& program);

/// Deduplicated canonical skeleton serializations, sorted lexicographically.
/// The resulting index order is the classifier's label space.
std::vector<std::string> enumerate_labels(const std::vector<action_program>& programs);

/// Node paths: "." is the root, otherwise slash-separated child indices
/// ("0/1" = second child of the first child). nullptr when out of range.
const action_program* node_at(const action_program& program, std::string_view path);
action_program* node_at(action_program& program, std::string_view path);

std::size_t node_count(const action_program& program);

}  // namespace qa
