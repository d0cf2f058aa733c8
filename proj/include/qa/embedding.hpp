#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qa {

/// Static word vectors, all of one dimension, keys lowercase.
struct vector_table {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> entries;
};

/// File format: optional "D <dim>" first line, then "token v1 ... vD".
vector_table load_vector_table(const std::string& path);
void write_vector_table(const std::string& path, const vector_table& table);

struct question_vector {
  std::vector<double> values;
  std::size_t known_token_count = 0;
};

/// Mean of the vectors of in-table tokens. When no token is known the vector
/// falls back to hashed character trigrams (per token, so the bag property
/// holds), L2-normalized.
question_vector embed(const vector_table& table, std::string_view question);

/// dot(u,v) / (|u| |v|), clamped to [-1, 1]. Throws zero_vector on zero norm.
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace qa
