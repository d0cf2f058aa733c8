#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qa {

/// Lowercase, strip punctuation, drop articles, split on whitespace. Numeric
/// tokens keep their decimal point and lose a trailing ".0".
std::vector<std::string> normalize_answer(std::string_view text);

/// 1 iff the normalized token sequences are equal.
int metric_em(std::string_view pred, std::string_view gold);

/// Bag-of-token F1 over normalized tokens; both empty -> 1, one empty -> 0.
double metric_f1(std::string_view pred, std::string_view gold);

struct eval_item {
  std::string pred;
  std::string gold;
  std::string skeleton;  // may be empty when unknown
};

struct skeleton_stats {
  std::size_t n = 0;
  double em = 0.0;
  double f1 = 0.0;
};

struct eval_report {
  std::size_t n = 0;
  double em = 0.0;
  double f1 = 0.0;
  std::map<std::string, skeleton_stats> per_skeleton;
  std::size_t errors = 0;  // predictions carrying the empty error sentinel
};

eval_report report(const std::vector<eval_item>& items);

}  // namespace qa
