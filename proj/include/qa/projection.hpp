#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qa/action_dsl.hpp"
#include "qa/embedding.hpp"
#include "qa/generator.hpp"

namespace qa {

struct pool_entry {
  std::string question;
  action_program program;
  question_vector vec;
};

/// Nearest-neighbor projection over the synthetic pool; order fixed at build.
struct cosine_projector {
  std::vector<pool_entry> pool;
};

cosine_projector build_pool(const std::vector<synthetic_example>& dataset,
                            const vector_table& vectors);

struct nn_result {
  std::size_t index = 0;
  double similarity = 0.0;
};

/// Argmax of cosine similarity; ties go to the lowest pool index.
nn_result project_cosine(const cosine_projector& projector, const vector_table& vectors,
                         std::string_view question);

struct train_config {
  int epochs = 200;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::uint64_t seed = 13;
  bool shuffle = true;
};

/// Multinomial logistic model over question embeddings; labels are canonical
/// skeleton serializations in enumerate_labels order. weights is row-major
/// L x (D+1), last column the bias.
struct skeleton_classifier {
  std::vector<std::string> labels;
  std::size_t dim = 0;
  std::vector<double> weights;

  double& at(std::size_t label, std::size_t j) { return weights[label * (dim + 1) + j]; }
  double at(std::size_t label, std::size_t j) const { return weights[label * (dim + 1) + j]; }
};

/// Zero-initialized minibatch gradient descent on cross-entropy with an L2
/// penalty on non-bias weights. Deterministic for a fixed config.
skeleton_classifier train_classifier(const std::vector<synthetic_example>& dataset,
                                     const vector_table& vectors,
                                     const train_config& config = {});

struct classify_result {
  std::vector<double> probabilities;  // sums to 1
  std::size_t top = 0;                // argmax, ties by lowest label index
};

classify_result classify(const skeleton_classifier& model, const vector_table& vectors,
                         std::string_view question);

/// Full-batch objective and gradient, exposed for finite-difference checks.
double ce_loss(const skeleton_classifier& model, const std::vector<std::vector<double>>& xs,
               const std::vector<std::size_t>& ys, double l2);
std::vector<double> ce_gradient(const skeleton_classifier& model,
                                const std::vector<std::vector<double>>& xs,
                                const std::vector<std::size_t>& ys, double l2);

/// Recovers phrase arguments for a bare skeleton from the question text:
/// template-anchored alignment first, then comparison-split and unary-chain
/// fallbacks.
action_program fill_arguments(const action_program& skeleton, const std::string& question,
                              const std::vector<question_template>& templates);

enum class projection_mode { cosine, classifier };

struct projection_models {
  const cosine_projector* pool = nullptr;
  const skeleton_classifier* classifier = nullptr;
  const vector_table* vectors = nullptr;
  const std::vector<question_template>* templates = nullptr;
};

action_program project(const std::string& question, projection_mode mode,
                       const projection_models& models);

void save_model(const std::string& path, const skeleton_classifier& model);
skeleton_classifier load_model(const std::string& path);

/// Pool file: dataset lines, each optionally followed by a cached vector line
/// (space-separated decimals). Entries without a cached vector need `vectors`.
void save_pool(const std::string& path, const cosine_projector& projector);
cosine_projector load_pool(const std::string& path, const vector_table* vectors);

}  // namespace qa
