#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qa {

// Offsets throughout the corpus and annotator are Unicode code points, not
// bytes; the two coincide for ASCII fixtures.
std::size_t cp_length(std::string_view text);
std::string cp_slice(std::string_view text, std::size_t begin, std::size_t end);

std::string lower_ascii(std::string_view text);
bool is_ascii_punct(char c);

/// Lowercased whitespace tokens with leading/trailing punctuation stripped;
/// interior punctuation ("42-yard") is kept.
std::vector<std::string> tokenize(std::string_view text);

struct token_span {
  std::size_t begin = 0;  // code point offsets into the original text
  std::size_t end = 0;
};

/// Spans of the tokens tokenize() would produce, in the original casing.
std::vector<token_span> tokenize_spans(std::string_view text);

/// Fixed 40-entry list: articles, prepositions, auxiliaries, wh-words and
/// the two coordinators. Scoring code depends on this exact list.
const std::vector<std::string>& stopwords();
bool is_stopword(const std::string& token);

/// Distinct non-stopword tokens of a phrase, in first-appearance order.
std::vector<std::string> content_tokens(std::string_view phrase);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qa
