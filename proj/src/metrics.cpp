#include "qa/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "qa/errors.hpp"
#include "qa/text.hpp"

namespace qa {

namespace {

bool is_numeric_token(const std::string& tok) {
  if (tok.empty()) return false;
  bool digit = false, dot = false;
  for (char c : tok) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digit;
}

std::string canonicalize_number(std::string tok) {
  std::size_t dot = tok.find('.');
  if (dot == std::string::npos) return tok;
  std::size_t last = tok.find_last_not_of('0');
  if (last == dot) last = dot - 1;  // "3.000" -> "3"
  return tok.substr(0, last + 1);
}

}  // namespace

std::vector<std::string> normalize_answer(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t begin = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string raw = lower_ascii(text.substr(begin, i - begin));

    std::string kept_dot;
    for (char c : raw)
      if (!is_ascii_punct(c) || c == '.') kept_dot += c;
    // trailing/leading dots are punctuation, interior ones may be decimals
    while (!kept_dot.empty() && kept_dot.front() == '.') kept_dot.erase(kept_dot.begin());
    while (!kept_dot.empty() && kept_dot.back() == '.') kept_dot.pop_back();

    std::string tok;
    if (is_numeric_token(kept_dot)) {
      tok = canonicalize_number(kept_dot);
    } else {
      for (char c : raw)
        if (!is_ascii_punct(c)) tok += c;
    }
    if (tok.empty()) continue;
    if (tok == "a" || tok == "an" || tok == "the") continue;
    out.push_back(std::move(tok));
  }
  return out;
}

int metric_em(std::string_view pred, std::string_view gold) {
  return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

double metric_f1(std::string_view pred, std::string_view gold) {
  auto p = normalize_answer(pred);
  auto g = normalize_answer(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;

  std::map<std::string, std::size_t> counts;
  for (const auto& tok : g) ++counts[tok];
  std::size_t overlap = 0;
  for (const auto& tok : p) {
    auto it = counts.find(tok);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

eval_report report(const std::vector<eval_item>& items) {
  if (items.empty()) fail(errc::empty_input, "nothing to score");
  eval_report rep;
  rep.n = items.size();
  for (const auto& item : items) {
    double em = metric_em(item.pred, item.gold);
    double f1 = metric_f1(item.pred, item.gold);
    rep.em += em;
    rep.f1 += f1;
    if (item.pred.empty()) ++rep.errors;
    auto& bucket = rep.per_skeleton[item.skeleton.empty() ? "-" : item.skeleton];
    ++bucket.n;
    bucket.em += em;
    bucket.f1 += f1;
  }
  rep.em /= static_cast<double>(rep.n);
  rep.f1 /= static_cast<double>(rep.n);
  for (auto& [skeleton, bucket] : rep.per_skeleton) {
    bucket.em /= static_cast<double>(bucket.n);
    bucket.f1 /= static_cast<double>(bucket.n);
  }
  return rep;
}

}  // namespace qa
