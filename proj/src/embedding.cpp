#include "qa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qa/errors.hpp"
#include "qa/text.hpp"

namespace qa {

vector_table load_vector_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open " + path);
  vector_table table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    if (line_number == 1 && token == "D") {
      std::size_t dim = 0;
      if (!(fields >> dim) || dim == 0)
        fail(errc::format_error, "line 1: bad dimension header");
      table.dim = dim;
      continue;
    }
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (values.empty())
      fail(errc::format_error, "line " + std::to_string(line_number) + ": no values");
    if (table.dim == 0) table.dim = values.size();
    if (values.size() != table.dim)
      fail(errc::format_error, "line " + std::to_string(line_number) + ": expected " +
                                   std::to_string(table.dim) + " values, found " +
                                   std::to_string(values.size()));
    std::string key = lower_ascii(token);
    if (!table.entries.emplace(std::move(key), std::move(values)).second)
      fail(errc::format_error,
           "line " + std::to_string(line_number) + ": duplicate token " + token);
  }
  if (table.entries.empty()) fail(errc::format_error, "empty vector file " + path);
  return table;
}

void write_vector_table(const std::string& path, const vector_table& table) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot write " + path);
  out << "D " << table.dim << "\n";
  std::vector<const std::string*> keys;
  keys.reserve(table.entries.size());
  for (const auto& [token, values] : table.entries) keys.push_back(&token);
  std::sort(keys.begin(), keys.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  char buf[64];
  for (const auto* token : keys) {
    out << *token;
    for (double v : table.entries.at(*token)) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

question_vector embed(const vector_table& table, std::string_view question) {
  question_vector qv;
  qv.values.assign(table.dim, 0.0);
  const auto tokens = tokenize(question);

  for (const auto& tok : tokens) {
    auto it = table.entries.find(tok);
    if (it == table.entries.end()) continue;
    for (std::size_t i = 0; i < table.dim; ++i) qv.values[i] += it->second[i];
    ++qv.known_token_count;
  }
  if (qv.known_token_count > 0) {
    for (double& v : qv.values) v /= static_cast<double>(qv.known_token_count);
    return qv;
  }

  // hashed fallback: character trigrams of each token
  for (const auto& tok : tokens) {
    if (tok.size() < 3) {
      qv.values[fnv1a64(tok) % table.dim] += 1.0;
      continue;
    }
    for (std::size_t i = 0; i + 3 <= tok.size(); ++i)
      qv.values[fnv1a64(std::string_view(tok).substr(i, 3)) % table.dim] += 1.0;
  }
  double norm = 0.0;
  for (double v : qv.values) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& v : qv.values) v /= norm;
  }
  return qv;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    fail(errc::dimension_mismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) fail(errc::zero_vector, "cosine of a zero vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace qa
