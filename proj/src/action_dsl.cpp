#include "qa/action_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "qa/errors.hpp"

namespace qa {

const char* value_kind_name(value_kind kind) {
  switch (kind) {
    case value_kind::pattn: return "PATTN";
    case value_kind::dateset: return "DATESET";
    case value_kind::count: return "COUNT";
    case value_kind::number: return "NUMBER";
    case value_kind::span: return "SPAN";
  }
  return "?";
}

const std::vector<action_kind>& registry() {
  using vk = value_kind;
  static const std::vector<action_kind> table = {
      {"find", {}, {}, vk::pattn, true},
      {"find_date", {}, {}, vk::dateset, true},
      {"filter", {}, {vk::pattn}, vk::pattn, true},
      {"relocate", {}, {vk::pattn}, vk::pattn, true},
      {"count", {}, {vk::pattn}, vk::count, false},
      {"max", {}, {vk::pattn}, vk::pattn, false},
      {"min", {}, {vk::pattn}, vk::pattn, false},
      {"find_num", {}, {vk::pattn}, vk::number, false},
      {"find_span", {}, {vk::pattn}, vk::span, false},
      {"year_difference", {"year_diff"}, {vk::dateset, vk::dateset}, vk::number, false},
      {"year_diff_single_event", {}, {vk::dateset}, vk::number, false},
      {"compare_date_lesser_than", {}, {vk::dateset, vk::dateset}, vk::pattn, false},
      {"compare_date_greater_than", {}, {vk::dateset, vk::dateset}, vk::pattn, false},
  };
  return table;
}

const action_kind* lookup_action(std::string_view name) {
  static const std::unordered_map<std::string_view, const action_kind*> index = [] {
    std::unordered_map<std::string_view, const action_kind*> m;
    for (const auto& kind : registry()) {
      m.emplace(kind.name, &kind);
      for (const auto& alias : kind.aliases) m.emplace(alias, &kind);
    }
    return m;
  }();
  auto it = index.find(name);
  return it == index.end() ? nullptr : it->second;
}

bool action_program::operator==(const action_program& other) const {
  return kind == other.kind && argument == other.argument && children == other.children;
}

namespace {

struct parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool match(std::string_view word) {
    skip_ws();
    if (text.substr(pos, word.size()) == word) {
      pos += word.size();
      return true;
    }
    return false;
  }

  std::string read_name() {
    skip_ws();
    std::size_t begin = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_') {
        ++pos;
      } else {
        break;
      }
    }
    if (pos == begin)
      fail(errc::malformed_syntax, "expected action name at position " + std::to_string(begin));
    return std::string(text.substr(begin, pos - begin));
  }

  std::string read_balanced_argument() {
    // opening '(' already consumed; ARGTEXT may contain balanced parentheses
    std::size_t depth = 1;
    std::size_t begin = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(') ++depth;
      if (c == ')') {
        --depth;
        if (depth == 0) {
          std::string_view raw = text.substr(begin, pos - begin);
          ++pos;
          std::size_t lead = raw.find_first_not_of(" \t");
          std::size_t trail = raw.find_last_not_of(" \t");
          if (lead == std::string_view::npos)
            fail(errc::malformed_syntax,
                 "empty argument at position " + std::to_string(begin));
          return std::string(raw.substr(lead, trail - lead + 1));
        }
      }
      ++pos;
    }
    fail(errc::malformed_syntax, "unbalanced parentheses at position " + std::to_string(begin));
  }

  action_program parse_node() {
    std::string name = read_name();
    const action_kind* kind = lookup_action(name);
    if (kind == nullptr) fail(errc::unknown_action, name);

    action_program node;
    node.kind = kind;

    skip_ws();
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      std::string arg = read_balanced_argument();
      if (!kind->takes_phrase_argument)
        fail(errc::unexpected_argument, kind->name + " takes no phrase argument");
      node.argument = std::move(arg);
    }

    const int arity = kind->arity();
    if (arity > 0) {
      if (!match("->"))
        fail(errc::arity_mismatch,
             kind->name + " expects " + std::to_string(arity) + " children, found 0");
      for (int i = 0; i < arity; ++i) {
        if (i > 0 && !match(","))
          fail(errc::arity_mismatch, kind->name + " expects " + std::to_string(arity) +
                                         " children, found " + std::to_string(i));
        node.children.push_back(parse_node());
      }
    }
    return node;
  }
};

void serialize_into(const action_program& node, std::string& out) {
  out += node.kind->name;
  if (node.argument) {
    out += '(';
    out += *node.argument;
    out += ')';
  }
  if (!node.children.empty()) {
    out += " -> ";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out += ", ";
      serialize_into(node.children[i], out);
    }
  }
}

value_kind check_node(const action_program& node) {
  if (node.kind == nullptr) fail(errc::malformed_syntax, "node without action kind");
  if (static_cast<int>(node.children.size()) != node.kind->arity())
    fail(errc::arity_mismatch, node.kind->name + " expects " +
                                   std::to_string(node.kind->arity()) + " children, found " +
                                   std::to_string(node.children.size()));
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    value_kind actual = check_node(node.children[i]);
    value_kind expected = node.kind->child_types[i];
    if (actual != expected)
      fail(errc::type_mismatch, node.kind->name + " child " + std::to_string(i) + ": expected " +
                                    value_kind_name(expected) + ", found " +
                                    value_kind_name(actual));
  }
  return node.kind->output_type;
}

}  // namespace

action_program parse_program(std::string_view text) {
  if (text.empty()) fail(errc::malformed_syntax, "empty program text");
  parser p{text};
  action_program root = p.parse_node();
  p.skip_ws();
  if (p.pos != text.size())
    fail(errc::malformed_syntax, "trailing input at position " + std::to_string(p.pos));
  return root;
}

std::string serialize_program(const action_program& program) {
  std::string out;
  serialize_into(program, out);
  return out;
}

value_kind type_check(const action_program& program) {
  value_kind root = check_node(program);
  if (root == value_kind::dateset)
    fail(errc::type_mismatch, "root type DATESET is not renderable");
  return root;
}

action_program skeletonize(const action_program& program) {
  action_program out;
  out.kind = program.kind;
  out.children.reserve(program.children.size());
  for (const auto& child : program.children) out.children.push_back(skeletonize(child));
  return out;
}

bool is_skeleton(const action_program& program) {
  if (program.argument) return false;
  return std::all_of(program.children.begin(), program.children.end(), is_skeleton);
}

std::vector<std::string> enumerate_labels(const std::vector<action_program>& programs) {
  if (programs.empty()) fail(errc::empty_input, "no programs to enumerate");
  std::set<std::string> labels;
  for (const auto& p : programs) labels.insert(serialize_program(skeletonize(p)));
  return {labels.begin(), labels.end()};
}

const action_program* node_at(const action_program& program, std::string_view path) {
  if (path == "." || path.empty()) return &program;
  const action_program* node = &program;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t next = path.find('/', pos);
    std::string_view part = path.substr(pos, next == std::string_view::npos ? next : next - pos);
    if (part.empty()) return nullptr;
    std::size_t index = 0;
    for (char c : part) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return nullptr;
      index = index * 10 + static_cast<std::size_t>(c - '0');
    }
    if (index >= node->children.size()) return nullptr;
    node = &node->children[index];
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return node;
}

action_program* node_at(action_program& program, std::string_view path) {
  return const_cast<action_program*>(node_at(static_cast<const action_program&>(program), path));
}

std::size_t node_count(const action_program& program) {
  std::size_t n = 1;
  for (const auto& child : program.children) n += node_count(child);
  return n;
}

}  // namespace qa
