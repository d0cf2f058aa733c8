#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "qa/errors.hpp"
#include "qa/projection.hpp"
#include "qa/text.hpp"
#include "test_support.hpp"

using namespace qa;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "qa_projection_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

synthetic_example make_example(const std::string& question, const std::string& program) {
  synthetic_example ex;
  ex.question = question;
  ex.program = parse_program(program);
  ex.paragraph_id = "p";
  return ex;
}

/// Two separable classes on the axes of a 2-d embedding space.
std::pair<std::vector<synthetic_example>, vector_table> axis_dataset() {
  vector_table table;
  table.dim = 2;
  table.entries["red"] = {1.0, 0.0};
  table.entries["blue"] = {0.0, 1.0};
  std::vector<synthetic_example> dataset;
  for (int i = 0; i < 50; ++i) {
    dataset.push_back(make_example("red item " + std::to_string(i), "count -> find(red)"));
    dataset.push_back(make_example("blue item " + std::to_string(i), "max -> find(blue)"));
  }
  return {dataset, table};
}

double independent_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);  // cosine lives in [-1, 1]; beyond is fp error
}

}  // namespace

TEST_CASE("build_pool keeps order and duplicates") {
  auto [dataset, table] = axis_dataset();
  dataset.push_back(dataset.front());  // duplicate question stays
  auto projector = build_pool(dataset, table);
  REQUIRE(projector.pool.size() == dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    CHECK(projector.pool[i].question == dataset[i].question);
    CHECK(projector.pool[i].vec.values == embed(table, dataset[i].question).values);
  }
  CHECK_THROWS_AS(build_pool({}, table), error);
}

TEST_CASE("project_cosine returns the nearest entry with ties at lowest index") {
  auto [dataset, table] = axis_dataset();
  auto projector = build_pool(dataset, table);

  // every blue question embeds identically, so the self query lands on the
  // first blue entry with similarity exactly 1
  auto self = project_cosine(projector, table, dataset[3].question);
  CHECK(self.index == 1);
  CHECK(self.similarity == doctest::Approx(1.0).epsilon(1e-9));

  // a pool with distinct embeddings returns the queried entry itself
  vector_table wide = table;
  wide.dim = 2;
  wide.entries["itemone"] = {0.3, 0.7};
  wide.entries["itemtwo"] = {0.9, 0.1};
  std::vector<synthetic_example> distinct = {
      make_example("red itemone", "count -> find(red)"),
      make_example("blue itemtwo", "max -> find(blue)"),
      make_example("red itemtwo", "count -> find(red)"),
  };
  auto wide_pool = build_pool(distinct, wide);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    auto nn = project_cosine(wide_pool, wide, distinct[i].question);
    CHECK(nn.index == i);
    CHECK(nn.similarity == doctest::Approx(1.0).epsilon(1e-9));
  }

  // every red question ties against "red"; the first pool entry wins
  auto tied = project_cosine(projector, table, "red");
  CHECK(tied.index == 0);

  cosine_projector solo;
  solo.pool.push_back(projector.pool[5]);
  CHECK(project_cosine(solo, table, "anything blue").index == 0);
}

TEST_CASE("brute-force rescan agrees with project_cosine") {
  auto templates = load_templates(qa_test::data_path("templates.txt"));
  auto corpus = load_corpus(qa_test::data_path("corpus.txt"));
  auto table = load_vector_table(qa_test::data_path("vectors.txt"));
  auto dataset = generate_dataset(templates, corpus, 120, 3);
  auto projector = build_pool(dataset, table);

  rng random(17);
  for (int i = 0; i < 100; ++i) {
    // perturb a pool question into a natural-form variant
    std::string q = dataset[random.below(dataset.size())].question;
    auto words = tokenize(q);
    if (!words.empty() && random.below(2) == 0) words.erase(words.begin() + random.below(words.size()));
    if (random.below(2) == 0) words.push_back("overall");
    std::string query;
    for (const auto& w : words) query += (query.empty() ? "" : " ") + w;
    if (query.empty()) query = q;

    auto got = project_cosine(projector, table, query);
    auto qv = embed(table, query);
    std::size_t best = 0;
    double best_sim = -2;
    for (std::size_t j = 0; j < projector.pool.size(); ++j) {
      double sim = independent_cosine(qv.values, projector.pool[j].vec.values);
      if (sim > best_sim) {
        best_sim = sim;
        best = j;
      }
    }
    CHECK(got.index == best);
    CHECK(got.similarity == doctest::Approx(best_sim).epsilon(1e-9));
  }
}

TEST_CASE("scaling embeddings never changes the nearest neighbor") {
  auto templates = load_templates(qa_test::data_path("templates.txt"));
  auto corpus = load_corpus(qa_test::data_path("corpus.txt"));
  auto table = load_vector_table(qa_test::data_path("vectors.txt"));
  auto dataset = generate_dataset(templates, corpus, 80, 19);

  vector_table scaled = table;
  for (auto& [token, values] : scaled.entries)
    for (double& v : values) v *= 0.25;

  auto base_pool = build_pool(dataset, table);
  auto scaled_pool = build_pool(dataset, scaled);
  rng random(29);
  for (int i = 0; i < 30; ++i) {
    const auto& q = dataset[random.below(dataset.size())].question;
    CHECK(project_cosine(base_pool, table, q).index ==
          project_cosine(scaled_pool, scaled, q).index);
  }
}

TEST_CASE("training separates axis-aligned classes") {
  auto [dataset, table] = axis_dataset();
  auto model = train_classifier(dataset, table);
  REQUIRE(model.labels.size() == 2);
  CHECK(model.labels[0] == "count -> find");
  CHECK(model.labels[1] == "max -> find");

  std::size_t correct = 0;
  for (const auto& ex : dataset) {
    auto result = classify(model, table, ex.question);
    if (model.labels[result.top] == serialize_program(skeletonize(ex.program))) ++correct;
  }
  CHECK(correct == dataset.size());  // 100% training accuracy

  // the separating direction has positive margin on both axes
  CHECK(model.at(0, 0) > model.at(1, 0));
  CHECK(model.at(1, 1) > model.at(0, 1));
}

TEST_CASE("one epoch matches an independent reimplementation of the update") {
  auto [dataset, table] = axis_dataset();
  train_config config;
  config.epochs = 1;
  config.shuffle = false;
  auto model = train_classifier(dataset, table, config);

  // replay: zero init, batches of 32 in order, mean gradient, l2 on non-bias
  const std::size_t L = 2, D = 2;
  std::vector<double> w(L * (D + 1), 0.0);
  std::vector<std::vector<double>> xs;
  std::vector<std::size_t> ys;
  for (const auto& ex : dataset) {
    xs.push_back(embed(table, ex.question).values);
    ys.push_back(ex.program.kind->name == "count" ? 0 : 1);
  }
  for (std::size_t begin = 0; begin < xs.size(); begin += 32) {
    std::size_t end = std::min(begin + 32, xs.size());
    std::vector<double> grad(L * (D + 1), 0.0);
    for (std::size_t k = begin; k < end; ++k) {
      double s0 = w[0] * xs[k][0] + w[1] * xs[k][1] + w[2];
      double s1 = w[3] * xs[k][0] + w[4] * xs[k][1] + w[5];
      double m = std::max(s0, s1);
      double e0 = std::exp(s0 - m), e1 = std::exp(s1 - m);
      double p0 = e0 / (e0 + e1), p1 = e1 / (e0 + e1);
      double g0 = p0 - (ys[k] == 0 ? 1.0 : 0.0);
      double g1 = p1 - (ys[k] == 1 ? 1.0 : 0.0);
      grad[0] += g0 * xs[k][0];
      grad[1] += g0 * xs[k][1];
      grad[2] += g0;
      grad[3] += g1 * xs[k][0];
      grad[4] += g1 * xs[k][1];
      grad[5] += g1;
    }
    double inv = 1.0 / static_cast<double>(end - begin);
    for (std::size_t j = 0; j < w.size(); ++j) {
      double g = grad[j] * inv;
      if (j % 3 != 2) g += config.l2 * w[j];
      w[j] -= config.learning_rate * g;
    }
  }
  for (std::size_t j = 0; j < w.size(); ++j)
    CHECK(model.weights[j] == doctest::Approx(w[j]).epsilon(1e-12));
}

TEST_CASE("training is deterministic and lowers the objective") {
  auto [dataset, table] = axis_dataset();
  auto a = train_classifier(dataset, table);
  auto b = train_classifier(dataset, table);
  CHECK(a.weights == b.weights);

  std::vector<std::vector<double>> xs;
  std::vector<std::size_t> ys;
  for (const auto& ex : dataset) {
    xs.push_back(embed(table, ex.question).values);
    ys.push_back(ex.program.kind->name == "count" ? 0 : 1);
  }
  skeleton_classifier zero = a;
  std::fill(zero.weights.begin(), zero.weights.end(), 0.0);
  CHECK(ce_loss(a, xs, ys, 1e-4) <= ce_loss(zero, xs, ys, 1e-4));
}

TEST_CASE("single-skeleton data is rejected") {
  vector_table table;
  table.dim = 2;
  table.entries["x"] = {1.0, 0.0};
  std::vector<synthetic_example> dataset = {make_example("x one", "count -> find(x)"),
                                            make_example("x two", "count -> find(x)")};
  try {
    train_classifier(dataset, table);
    FAIL("expected single_class");
  } catch (const error& e) {
    CHECK(e.code() == errc::single_class);
  }
}

TEST_CASE("classify with zero weights is uniform and sums to one") {
  auto [dataset, table] = axis_dataset();
  auto model = train_classifier(dataset, table);
  skeleton_classifier zero = model;
  std::fill(zero.weights.begin(), zero.weights.end(), 0.0);
  auto result = classify(zero, table, "red item");
  CHECK(result.probabilities[0] == doctest::Approx(0.5));
  CHECK(result.probabilities[1] == doctest::Approx(0.5));
  CHECK(result.top == 0);  // tie -> lowest label index

  rng random(23);
  for (int i = 0; i < 20; ++i) {
    std::string q = (random.below(2) ? "red" : "blue") + std::string(" thing ") +
                    std::to_string(random.below(100));
    auto r = classify(model, table, q);
    double sum = 0;
    for (double p : r.probabilities) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
    CHECK(std::find(model.labels.begin(), model.labels.end(), model.labels[r.top]) !=
          model.labels.end());
  }

  vector_table wrong;
  wrong.dim = 3;
  wrong.entries["x"] = {1, 2, 3};
  CHECK_THROWS_AS(classify(model, wrong, "x"), error);
}

TEST_CASE("analytic gradient matches central finite differences") {
  rng random(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t D = 2 + random.below(7);  // up to 8
    const std::size_t L = 2 + random.below(3);  // up to 4
    skeleton_classifier model;
    model.dim = D;
    for (std::size_t l = 0; l < L; ++l) model.labels.push_back("label" + std::to_string(l));
    model.weights.resize(L * (D + 1));
    for (auto& w : model.weights)
      w = static_cast<double>(random.below(2000)) / 1000.0 - 1.0;

    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (int i = 0; i < 12; ++i) {
      std::vector<double> x(D);
      for (auto& v : x) v = static_cast<double>(random.below(2000)) / 1000.0 - 1.0;
      xs.push_back(std::move(x));
      ys.push_back(random.below(L));
    }

    auto grad = ce_gradient(model, xs, ys, 1e-3);
    const double h = 1e-5;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
      skeleton_classifier plus = model, minus = model;
      plus.weights[j] += h;
      minus.weights[j] -= h;
      double numeric = (ce_loss(plus, xs, ys, 1e-3) - ce_loss(minus, xs, ys, 1e-3)) / (2 * h);
      double denom = std::max({std::abs(numeric), std::abs(grad[j]), 1e-8});
      CHECK(std::abs(numeric - grad[j]) / denom <= 1e-4);
    }
  }
}

TEST_CASE("fill_arguments aligns against the template bank") {
  auto templates = load_templates(qa_test::data_path("templates.txt"));

  auto cmp = parse_program("compare_date_lesser_than -> find_date, find_date");
  auto program = fill_arguments(
      cmp,
      "Which happened earlier, the formation of the United Nations or the dissolution of "
      "the Soviet Union?",
      templates);
  CHECK(program.children[0].argument == "the formation of the United Nations");
  CHECK(program.children[1].argument == "the dissolution of the Soviet Union");
  CHECK_NOTHROW(type_check(program));

  auto yd = parse_program("year_difference -> find_date, find_date");
  auto years = fill_arguments(
      yd,
      "How many years after the formation of the United Nations was the Universal "
      "Declaration of Human Rights adopted?",
      templates);
  CHECK(years.children[0].argument == "the formation of the United Nations");
  CHECK(years.children[1].argument == "the Universal Declaration of Human Rights adopted");

  auto plain = fill_arguments(parse_program("count -> find"),
                              "How many touchdowns were scored?", templates);
  CHECK(plain.children[0].argument == "touchdowns scored");
}

TEST_CASE("fill_arguments falls back when no pattern aligns") {
  auto templates = load_templates(qa_test::data_path("templates.txt"));

  // comparison split on ", " and " or "
  auto cmp = parse_program("compare_date_lesser_than -> find_date, find_date");
  auto program = fill_arguments(
      cmp, "Tell me which came first, the oil crisis or the energy crisis?", templates);
  CHECK(program.children[0].argument == "the oil crisis");
  CHECK(program.children[1].argument == "the energy crisis");

  // unary chain: tail content tokens feed the leaf
  auto counted = fill_arguments(parse_program("count -> find"),
                                "How many touchdowns were scored on Sunday?", templates);
  CHECK(counted.children[0].argument == "sunday");

  // prepositional phrase feeds the filter node
  auto filtered =
      fill_arguments(parse_program("count -> filter -> find"),
                     "How many field goals were missed in the final quarter?", templates);
  CHECK(filtered.children[0].argument == "in the final quarter");
  CHECK(filtered.children[0].children[0].argument == "missed");

  CHECK_THROWS_AS(fill_arguments(parse_program("find_num -> find"), "whatever", templates),
                  error);
}

TEST_CASE("project composes the two projection routes") {
  auto templates = load_templates(qa_test::data_path("templates.txt"));
  auto corpus = load_corpus(qa_test::data_path("corpus.txt"));
  auto table = load_vector_table(qa_test::data_path("vectors.txt"));
  auto dataset = generate_dataset(templates, corpus, 300, 11);

  auto projector = build_pool(dataset, table);
  auto model = train_classifier(dataset, table);

  projection_models models;
  models.pool = &projector;
  models.classifier = &model;
  models.vectors = &table;
  models.templates = &templates;

  // a pool question projects back to its own program
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& ex = dataset[i * 7];
    auto program = project(ex.question, projection_mode::cosine, models);
    CHECK(program == ex.program);
  }

  // classifier-mode output always type-checks
  rng random(5);
  for (int i = 0; i < 40; ++i) {
    const auto& ex = dataset[random.below(dataset.size())];
    auto program = project(ex.question, projection_mode::classifier, models);
    CHECK_NOTHROW(type_check(program));
  }
}

TEST_CASE("model files round trip") {
  auto [dataset, table] = axis_dataset();
  auto model = train_classifier(dataset, table);
  auto path = temp_file("model.txt");
  save_model(path.string(), model);
  auto reloaded = load_model(path.string());
  CHECK(reloaded.labels == model.labels);
  CHECK(reloaded.dim == model.dim);
  CHECK(reloaded.weights == model.weights);
}

TEST_CASE("pool files round trip with cached vectors") {
  auto [dataset, table] = axis_dataset();
  auto projector = build_pool(dataset, table);
  auto path = temp_file("pool.txt");
  save_pool(path.string(), projector);
  auto reloaded = load_pool(path.string(), nullptr);
  REQUIRE(reloaded.pool.size() == projector.pool.size());
  for (std::size_t i = 0; i < reloaded.pool.size(); ++i) {
    CHECK(reloaded.pool[i].question == projector.pool[i].question);
    CHECK(reloaded.pool[i].program == projector.pool[i].program);
    CHECK(reloaded.pool[i].vec.values == projector.pool[i].vec.values);
  }

  // a plain dataset file works too when a table is supplied
  auto dataset_path = temp_file("pool_dataset.tsv");
  write_dataset(dataset_path.string(), dataset);
  auto embedded = load_pool(dataset_path.string(), &table);
  CHECK(embedded.pool.size() == dataset.size());
  CHECK(embedded.pool[0].vec.values == projector.pool[0].vec.values);
  CHECK_THROWS_AS(load_pool(dataset_path.string(), nullptr), error);
}
