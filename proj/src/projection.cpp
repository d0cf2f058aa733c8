#include "qa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "qa/errors.hpp"
#include "qa/rng.hpp"
#include "qa/text.hpp"

namespace qa {

cosine_projector build_pool(const std::vector<synthetic_example>& dataset,
                            const vector_table& vectors) {
  if (dataset.empty()) fail(errc::empty_dataset, "cannot build a pool from no examples");
  cosine_projector projector;
  projector.pool.reserve(dataset.size());
  for (const auto& ex : dataset)
    projector.pool.push_back({ex.question, ex.program, embed(vectors, ex.question)});
  return projector;
}

nn_result project_cosine(const cosine_projector& projector, const vector_table& vectors,
                         std::string_view question) {
  if (projector.pool.empty()) fail(errc::empty_dataset, "empty pool");
  question_vector qv = embed(vectors, question);
  nn_result best{0, -2.0};
  for (std::size_t i = 0; i < projector.pool.size(); ++i) {
    double sim = cosine(qv.values, projector.pool[i].vec.values);
    if (sim > best.similarity) best = {i, sim};
  }
  return best;
}

namespace {

constexpr std::size_t batch_size = 32;

void softmax_scores(std::vector<double>& scores) {
  double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

std::vector<double> affine_scores(const skeleton_classifier& model,
                                  const std::vector<double>& x) {
  const std::size_t cols = model.dim + 1;
  std::vector<double> scores(model.labels.size(), 0.0);
  for (std::size_t l = 0; l < scores.size(); ++l) {
    double s = model.weights[l * cols + model.dim];  // bias
    for (std::size_t j = 0; j < model.dim; ++j) s += model.weights[l * cols + j] * x[j];
    scores[l] = s;
  }
  return scores;
}

}  // namespace

skeleton_classifier train_classifier(const std::vector<synthetic_example>& dataset,
                                     const vector_table& vectors, const train_config& config) {
  if (dataset.empty()) fail(errc::empty_dataset, "no training examples");
  if (config.epochs < 1) fail(errc::empty_input, "epochs must be >= 1");

  std::vector<action_program> programs;
  programs.reserve(dataset.size());
  for (const auto& ex : dataset) {
    type_check(ex.program);
    programs.push_back(ex.program);
  }
  skeleton_classifier model;
  model.labels = enumerate_labels(programs);
  if (model.labels.size() < 2)
    fail(errc::single_class, "training needs at least two distinct skeletons");
  model.dim = vectors.dim;
  model.weights.assign(model.labels.size() * (model.dim + 1), 0.0);

  std::unordered_map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < model.labels.size(); ++i) label_index.emplace(model.labels[i], i);

  const std::size_t n = dataset.size();
  std::vector<std::vector<double>> xs(n);
  std::vector<std::size_t> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = embed(vectors, dataset[i].question).values;
    ys[i] = label_index.at(serialize_program(skeletonize(dataset[i].program)));
  }

  const std::size_t L = model.labels.size();
  const std::size_t cols = model.dim + 1;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng random(config.seed);
  std::vector<double> grad(L * cols);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) random.shuffle(order);
    for (std::size_t begin = 0; begin < n; begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, n);
      const double inv = 1.0 / static_cast<double>(end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = begin; k < end; ++k) {
        const auto& x = xs[order[k]];
        auto probs = affine_scores(model, x);
        softmax_scores(probs);
        probs[ys[order[k]]] -= 1.0;
        for (std::size_t l = 0; l < L; ++l) {
          const double g = probs[l];
          if (g == 0.0) continue;
          for (std::size_t j = 0; j < model.dim; ++j) grad[l * cols + j] += g * x[j];
          grad[l * cols + model.dim] += g;
        }
      }
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t j = 0; j < cols; ++j) {
          double g = grad[l * cols + j] * inv;
          if (j < model.dim) g += config.l2 * model.weights[l * cols + j];
          model.weights[l * cols + j] -= config.learning_rate * g;
        }
      }
    }
  }
  return model;
}

classify_result classify(const skeleton_classifier& model, const vector_table& vectors,
                         std::string_view question) {
  if (vectors.dim != model.dim)
    fail(errc::dimension_mismatch, "provider dimension " + std::to_string(vectors.dim) +
                                       " vs model " + std::to_string(model.dim));
  question_vector qv = embed(vectors, question);
  classify_result result;
  result.probabilities = affine_scores(model, qv.values);
  softmax_scores(result.probabilities);
  result.top = static_cast<std::size_t>(
      std::max_element(result.probabilities.begin(), result.probabilities.end()) -
      result.probabilities.begin());
  return result;
}

double ce_loss(const skeleton_classifier& model, const std::vector<std::vector<double>>& xs,
               const std::vector<std::size_t>& ys, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto probs = affine_scores(model, xs[i]);
    softmax_scores(probs);
    loss -= std::log(std::max(probs[ys[i]], 1e-300));
  }
  loss /= static_cast<double>(xs.size());
  const std::size_t cols = model.dim + 1;
  double penalty = 0.0;
  for (std::size_t l = 0; l < model.labels.size(); ++l)
    for (std::size_t j = 0; j < model.dim; ++j)
      penalty += model.weights[l * cols + j] * model.weights[l * cols + j];
  return loss + 0.5 * l2 * penalty;
}

std::vector<double> ce_gradient(const skeleton_classifier& model,
                                const std::vector<std::vector<double>>& xs,
                                const std::vector<std::size_t>& ys, double l2) {
  const std::size_t L = model.labels.size();
  const std::size_t cols = model.dim + 1;
  std::vector<double> grad(L * cols, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto probs = affine_scores(model, xs[i]);
    softmax_scores(probs);
    probs[ys[i]] -= 1.0;
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t j = 0; j < model.dim; ++j) grad[l * cols + j] += probs[l] * xs[i][j];
      grad[l * cols + model.dim] += probs[l];
    }
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t j = 0; j < cols; ++j) {
      grad[l * cols + j] *= inv;
      if (j < model.dim) grad[l * cols + j] += l2 * model.weights[l * cols + j];
    }
  return grad;
}

// --- argument filling -------------------------------------------------------

namespace {

std::size_t common_prefix_tokens(const std::string& question, const std::string& prefix) {
  auto q = tokenize(question);
  auto p = tokenize(prefix);
  std::size_t i = 0;
  while (i < q.size() && i < p.size() && q[i] == p[i]) ++i;
  return i;
}

/// Anchors the pattern's literal pieces inside the question (case-insensitive)
/// and extracts slot surfaces. Returns false when the question does not fit.
bool align_pattern(const question_template& tmpl, const std::string& question,
                   std::map<int, std::string>& fills) {
  const std::string q_lower = lower_ascii(question);
  std::size_t pos = 0;
  const slot_ref* pending = nullptr;

  auto assign = [&](std::size_t begin, std::size_t end) {
    if (begin >= end) return false;
    fills[pending->index] = question.substr(begin, end - begin);
    pending = nullptr;
    return true;
  };

  for (std::size_t i = 0; i < tmpl.parts.size(); ++i) {
    const auto& part = tmpl.parts[i];
    if (const auto* slot = std::get_if<slot_ref>(&part)) {
      if (pending != nullptr) return false;  // adjacent slots cannot be split
      pending = slot;
      continue;
    }
    const std::string literal = lower_ascii(std::get<std::string>(part));
    const bool last = i + 1 == tmpl.parts.size();
    if (pending == nullptr) {
      if (q_lower.compare(pos, literal.size(), literal) != 0) return false;
      pos += literal.size();
    } else if (last) {
      if (q_lower.size() < literal.size()) return false;
      std::size_t at = q_lower.size() - literal.size();
      if (q_lower.compare(at, literal.size(), literal) != 0) return false;
      if (!assign(pos, at)) return false;
      pos = q_lower.size();
    } else {
      std::size_t at = q_lower.find(literal, pos);
      if (at == std::string::npos) return false;
      if (!assign(pos, at)) return false;
      pos = at + literal.size();
    }
  }
  if (pending != nullptr) {
    if (!assign(pos, q_lower.size())) return false;
    pos = q_lower.size();
  }
  return pos == q_lower.size();
}

std::vector<action_program*> phrase_nodes(action_program& program) {
  std::vector<action_program*> nodes;
  auto walk = [&](auto&& self, action_program& node) -> void {
    if (node.kind->takes_phrase_argument) nodes.push_back(&node);
    for (auto& child : node.children) self(self, child);
  };
  walk(walk, program);
  return nodes;
}

bool is_unary_chain(const action_program& program) {
  const action_program* node = &program;
  while (node != nullptr) {
    if (node->children.size() > 1) return false;
    node = node->children.empty() ? nullptr : &node->children[0];
  }
  return true;
}

action_program* find_node(action_program& program, std::string_view name) {
  if (program.kind->name == name) return &program;
  for (auto& child : program.children) {
    if (auto* hit = find_node(child, name)) return hit;
  }
  return nullptr;
}

std::string strip_edge(std::string text) {
  while (!text.empty() && (std::isspace(static_cast<unsigned char>(text.back())) ||
                           text.back() == '?' || text.back() == '!' || text.back() == '.' ||
                           text.back() == ','))
    text.pop_back();
  std::size_t lead = 0;
  while (lead < text.size() && (std::isspace(static_cast<unsigned char>(text[lead])) ||
                                text[lead] == ','))
    ++lead;
  return text.substr(lead);
}

/// Comparison questions split on ", " and " or " into two event phrases.
bool fill_comparison(action_program& program, const std::string& question) {
  auto nodes = phrase_nodes(program);
  if (nodes.size() != 2 || nodes[0]->kind->name != "find_date" ||
      nodes[1]->kind->name != "find_date")
    return false;
  std::string s = strip_edge(question);
  std::string s_lower = lower_ascii(s);
  std::size_t or_at = s_lower.rfind(" or ");
  if (or_at == std::string::npos) return false;
  std::string left = s.substr(0, or_at);
  std::string right = strip_edge(s.substr(or_at + 4));
  std::size_t comma = left.rfind(", ");
  if (comma != std::string::npos) left = left.substr(comma + 2);
  left = strip_edge(left);
  if (left.empty() || right.empty()) return false;
  nodes[0]->argument = left;
  nodes[1]->argument = right;
  return true;
}

/// Unary chains take the question tail after the template prefix: a trailing
/// "in the ..."/"of the ..." phrase feeds the filter node, remaining content
/// tokens feed the deepest leaf, and a leading "who <verb>" feeds relocate.
bool fill_unary_chain(action_program& program, const std::string& question,
                      const std::string& best_prefix) {
  if (!is_unary_chain(program)) return false;

  const auto spans = tokenize_spans(question);
  std::size_t skip = common_prefix_tokens(question, best_prefix);
  std::string tail;
  if (skip < spans.size()) {
    tail = cp_slice(question, spans[skip].begin, cp_length(question));
  }
  tail = strip_edge(tail);

  std::string pp;
  std::string rest = tail;
  {
    std::string tail_lower = lower_ascii(" " + tail);
    std::size_t in_at = tail_lower.rfind(" in the ");
    std::size_t of_at = tail_lower.rfind(" of the ");
    std::size_t at = std::string::npos;
    if (in_at != std::string::npos) at = in_at;
    if (of_at != std::string::npos && (at == std::string::npos || of_at > at)) at = of_at;
    if (at != std::string::npos) {
      pp = strip_edge(tail.substr(at));  // tail_lower has one leading pad space
      rest = strip_edge(tail.substr(0, at));
    }
  }

  if (auto* filter_node = find_node(program, "filter")) {
    if (pp.empty()) return false;
    filter_node->argument = pp;
  }

  action_program* leaf = &program;
  while (!leaf->children.empty()) leaf = &leaf->children[0];
  if (leaf->kind->takes_phrase_argument) {
    std::vector<std::string> words = content_tokens(rest);
    if (words.empty()) words = content_tokens(tail);
    if (words.empty()) words = content_tokens(question);
    if (words.empty()) return false;
    std::string arg;
    for (const auto& w : words) {
      if (!arg.empty()) arg += ' ';
      arg += w;
    }
    leaf->argument = arg;
  }

  if (auto* relocate_node = find_node(program, "relocate")) {
    if (spans.empty()) return false;
    std::size_t take = std::min<std::size_t>(2, spans.size());
    relocate_node->argument =
        cp_slice(question, spans[0].begin, spans[take - 1].end);
  }
  return true;
}

bool arguments_complete(action_program& program) {
  for (auto* node : phrase_nodes(program))
    if (!node->argument || node->argument->empty()) return false;
  return true;
}

}  // namespace

action_program fill_arguments(const action_program& skeleton, const std::string& question,
                              const std::vector<question_template>& templates) {
  const std::string target = serialize_program(skeletonize(skeleton));

  std::vector<const question_template*> candidates;
  for (const auto& tmpl : templates)
    if (serialize_program(tmpl.skeleton) == target) candidates.push_back(&tmpl);
  if (candidates.empty()) fail(errc::no_template_for_skeleton, target);

  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const question_template* a, const question_template* b) {
                     return common_prefix_tokens(question, a->prefix) >
                            common_prefix_tokens(question, b->prefix);
                   });

  for (const auto* tmpl : candidates) {
    std::map<int, std::string> fills;
    if (!align_pattern(*tmpl, question, fills)) continue;
    action_program program = tmpl->skeleton;
    bool ok = true;
    try {
      for (const auto& [path, arg_pattern] : tmpl->arg_patterns)
        node_at(program, path)->argument = substitute_slots(arg_pattern, fills);
    } catch (const error&) {
      ok = false;
    }
    if (ok && arguments_complete(program)) return program;
  }

  action_program program = skeletonize(skeleton);
  if (fill_comparison(program, question) && arguments_complete(program)) return program;
  program = skeletonize(skeleton);
  if (fill_unary_chain(program, question, candidates.front()->prefix) &&
      arguments_complete(program))
    return program;

  fail(errc::alignment_failure, "cannot recover arguments for '" + question + "'");
}

action_program project(const std::string& question, projection_mode mode,
                       const projection_models& models) {
  if (models.vectors == nullptr) fail(errc::empty_input, "projection needs a vector table");
  if (mode == projection_mode::cosine) {
    if (models.pool == nullptr) fail(errc::empty_input, "cosine mode needs a pool");
    nn_result nn = project_cosine(*models.pool, *models.vectors, question);
    const pool_entry& entry = models.pool->pool[nn.index];
    if (models.templates == nullptr) return entry.program;
    return fill_arguments(skeletonize(entry.program), question, *models.templates);
  }
  if (models.classifier == nullptr) fail(errc::empty_input, "classifier mode needs a model");
  if (models.templates == nullptr)
    fail(errc::empty_input, "classifier mode needs templates for argument filling");
  classify_result result = classify(*models.classifier, *models.vectors, question);
  action_program skeleton = parse_program(models.classifier->labels[result.top]);
  return fill_arguments(skeleton, question, *models.templates);
}

// --- model and pool files ----------------------------------------------------

void save_model(const std::string& path, const skeleton_classifier& model) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot write " + path);
  out << "LABELS " << model.labels.size() << "\n";
  for (const auto& label : model.labels) out << label << "\n";
  out << "WEIGHTS " << model.labels.size() << " " << model.dim + 1 << "\n";
  char buf[64];
  for (std::size_t l = 0; l < model.labels.size(); ++l) {
    for (std::size_t j = 0; j <= model.dim; ++j) {
      std::snprintf(buf, sizeof(buf), j == 0 ? "%.17g" : " %.17g", model.at(l, j));
      out << buf;
    }
    out << "\n";
  }
}

skeleton_classifier load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open " + path);
  skeleton_classifier model;
  std::string line;
  if (!std::getline(in, line) || line.rfind("LABELS ", 0) != 0)
    fail(errc::format_error, path + ": expected LABELS header");
  std::size_t label_count = std::stoul(line.substr(7));
  for (std::size_t i = 0; i < label_count; ++i) {
    if (!std::getline(in, line)) fail(errc::format_error, path + ": truncated label list");
    parse_program(line);  // labels must be valid skeleton serializations
    model.labels.push_back(line);
  }
  if (!std::getline(in, line) || line.rfind("WEIGHTS ", 0) != 0)
    fail(errc::format_error, path + ": expected WEIGHTS header");
  std::istringstream header(line.substr(8));
  std::size_t rows = 0, cols = 0;
  header >> rows >> cols;
  if (rows != label_count || cols < 2) fail(errc::format_error, path + ": bad WEIGHTS header");
  model.dim = cols - 1;
  model.weights.assign(rows * cols, 0.0);
  for (std::size_t l = 0; l < rows; ++l) {
    if (!std::getline(in, line)) fail(errc::format_error, path + ": truncated weights");
    std::istringstream values(line);
    for (std::size_t j = 0; j < cols; ++j) {
      if (!(values >> model.weights[l * cols + j]))
        fail(errc::format_error, path + ": bad weight row " + std::to_string(l));
    }
  }
  return model;
}

void save_pool(const std::string& path, const cosine_projector& projector) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot write " + path);
  char buf[64];
  for (const auto& entry : projector.pool) {
    out << entry.question << "\t" << serialize_program(entry.program) << "\t\t\n";
    for (std::size_t i = 0; i < entry.vec.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), i == 0 ? "%.17g" : " %.17g", entry.vec.values[i]);
      out << buf;
    }
    out << "\n";
  }
}

cosine_projector load_pool(const std::string& path, const vector_table* vectors) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open " + path);
  cosine_projector projector;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.find('\t') != std::string::npos) {
      std::vector<std::string> cols;
      std::size_t pos = 0;
      while (true) {
        std::size_t tab = line.find('\t', pos);
        cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
        if (tab == std::string::npos) break;
        pos = tab + 1;
      }
      if (cols.size() < 2)
        fail(errc::format_error, "line " + std::to_string(line_number) + ": bad pool entry");
      pool_entry entry;
      entry.question = cols[0];
      entry.program = parse_program(cols[1]);
      projector.pool.push_back(std::move(entry));
    } else {
      if (projector.pool.empty())
        fail(errc::format_error, "line " + std::to_string(line_number) + ": vector before entry");
      std::istringstream values(line);
      std::vector<double> vec;
      double v = 0.0;
      while (values >> v) vec.push_back(v);
      projector.pool.back().vec.values = std::move(vec);
    }
  }
  if (projector.pool.empty()) fail(errc::empty_dataset, path + " holds no pool entries");
  std::size_t dim = 0;
  for (const auto& entry : projector.pool)
    if (!entry.vec.values.empty()) dim = entry.vec.values.size();
  for (auto& entry : projector.pool) {
    if (!entry.vec.values.empty()) {
      if (entry.vec.values.size() != dim)
        fail(errc::dimension_mismatch, "pool vectors disagree on dimension");
      continue;
    }
    if (vectors == nullptr)
      fail(errc::format_error, "pool entry '" + entry.question +
                                   "' has no cached vector and no vector table was given");
    entry.vec = embed(*vectors, entry.question);
    if (dim == 0) dim = entry.vec.values.size();
  }
  return projector;
}

}  // namespace qa
