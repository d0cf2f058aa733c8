#include "qa/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace qa {

namespace {

bool is_cp_start(unsigned char b) { return (b & 0xC0) != 0x80; }

}  // namespace

std::size_t cp_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char b : text)
    if (is_cp_start(b)) ++n;
  return n;
}

std::string cp_slice(std::string_view text, std::size_t begin, std::size_t end) {
  if (begin >= end) return {};
  std::size_t cp = 0;
  std::size_t byte_begin = text.size();
  std::size_t byte_end = text.size();
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_cp_start(static_cast<unsigned char>(text[i]))) continue;
    if (cp == begin) byte_begin = i;
    if (cp == end) {
      byte_end = i;
      break;
    }
    ++cp;
  }
  if (byte_begin >= text.size() && begin >= cp_length(text)) return {};
  return std::string(text.substr(byte_begin, byte_end - byte_begin));
}

std::string lower_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

std::vector<token_span> tokenize_spans(std::string_view text) {
  std::vector<token_span> spans;
  std::size_t cp = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    // skip whitespace
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) {
      if (is_cp_start(static_cast<unsigned char>(text[i]))) ++cp;
      ++i;
    }
    if (i >= n) break;
    std::size_t tok_cp_begin = cp;
    std::size_t tok_byte_begin = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) {
      if (is_cp_start(static_cast<unsigned char>(text[i]))) ++cp;
      ++i;
    }
    std::size_t tok_cp_end = cp;
    std::string_view raw = text.substr(tok_byte_begin, i - tok_byte_begin);
    // strip punctuation at the edges, adjusting code point offsets
    std::size_t lead = 0;
    while (lead < raw.size() && is_ascii_punct(raw[lead])) ++lead;
    std::size_t trail = 0;
    while (trail + lead < raw.size() && is_ascii_punct(raw[raw.size() - 1 - trail])) ++trail;
    if (lead + trail >= raw.size()) continue;  // punctuation-only token
    // edge punctuation is ASCII, so byte trims equal code point trims
    spans.push_back({tok_cp_begin + lead, tok_cp_end - trail});
  }
  return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t begin = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view raw = text.substr(begin, i - begin);
    std::size_t lead = 0;
    while (lead < raw.size() && is_ascii_punct(raw[lead])) ++lead;
    std::size_t trail = 0;
    while (trail + lead < raw.size() && is_ascii_punct(raw[raw.size() - 1 - trail])) ++trail;
    if (lead + trail >= raw.size()) continue;
    tokens.push_back(lower_ascii(raw.substr(lead, raw.size() - lead - trail)));
  }
  return tokens;
}

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> words = {
      // articles
      "a", "an", "the",
      // prepositions
      "in", "on", "at", "of", "to", "for", "from", "by", "with", "after",
      "before", "between", "during", "over", "under",
      // auxiliaries
      "is", "are", "was", "were", "be", "been", "do", "does", "did", "has",
      "have", "had", "will", "would", "can", "could",
      // wh-words
      "who", "what", "when", "which",
      // coordinators
      "and", "or"};
  return words;
}

bool is_stopword(const std::string& token) {
  static const std::unordered_set<std::string> set(stopwords().begin(), stopwords().end());
  return set.count(token) > 0;
}

std::vector<std::string> content_tokens(std::string_view phrase) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(phrase)) {
    if (is_stopword(tok)) continue;
    if (std::find(out.begin(), out.end(), tok) == out.end()) out.push_back(tok);
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace qa
