#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "qa/action_dsl.hpp"
#include "qa/corpus.hpp"
#include "qa/embedding.hpp"
#include "qa/errors.hpp"
#include "qa/generator.hpp"
#include "qa/interpreter.hpp"
#include "qa/metrics.hpp"
#include "qa/projection.hpp"

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) qa::fail(qa::errc::io_failure, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  return cols;
}

struct generate_options {
  std::string templates, corpus, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool answers = false;
};

int run_generate(const generate_options& opt) {
  auto templates = qa::load_templates(opt.templates);
  auto corpus = qa::load_corpus(opt.corpus);
  auto dataset = qa::generate_dataset(templates, corpus, opt.n, opt.seed);
  if (opt.answers) {
    auto result = qa::with_gold_answers(std::move(dataset), corpus);
    std::fprintf(stderr, "generated=%zu kept=%zu dropped=%zu\n", opt.n, result.kept.size(),
                 result.dropped);
    dataset = std::move(result.kept);
  }
  qa::write_dataset(opt.out, dataset);
  return 0;
}

struct train_options {
  std::string data, vectors, model;
  qa::train_config config;
  double holdout = 0.0;
};

int run_train(const train_options& opt) {
  auto dataset = qa::load_dataset(opt.data);
  auto vectors = qa::load_vector_table(opt.vectors);

  std::vector<qa::synthetic_example> train_set = dataset;
  std::vector<qa::synthetic_example> held_out;
  if (opt.holdout > 0.0) {
    auto held = static_cast<std::size_t>(opt.holdout * static_cast<double>(dataset.size()));
    if (held == 0 || held >= dataset.size())
      qa::fail(qa::errc::empty_input, "holdout fraction leaves no data on one side");
    held_out.assign(dataset.end() - static_cast<std::ptrdiff_t>(held), dataset.end());
    train_set.assign(dataset.begin(), dataset.end() - static_cast<std::ptrdiff_t>(held));
  }

  auto model = qa::train_classifier(train_set, vectors, opt.config);
  qa::save_model(opt.model, model);

  if (!held_out.empty()) {
    std::size_t correct = 0;
    for (const auto& ex : held_out) {
      auto result = qa::classify(model, vectors, ex.question);
      if (model.labels[result.top] == qa::serialize_program(qa::skeletonize(ex.program)))
        ++correct;
    }
    std::printf("holdout_accuracy=%.4f\n",
                static_cast<double>(correct) / static_cast<double>(held_out.size()));
  }
  return 0;
}

struct project_options {
  std::string model, pool, vectors, questions, out, templates;
  std::string mode = "classifier";
};

int run_project(const project_options& opt) {
  if (opt.model.empty() == opt.pool.empty())
    qa::fail(qa::errc::empty_input, "pass exactly one of --model and --pool");
  auto vectors = qa::load_vector_table(opt.vectors);

  std::vector<qa::question_template> templates;
  if (!opt.templates.empty()) templates = qa::load_templates(opt.templates);

  qa::projection_models models;
  models.vectors = &vectors;
  if (!templates.empty()) models.templates = &templates;

  qa::skeleton_classifier model;
  qa::cosine_projector pool;
  qa::projection_mode mode;
  if (opt.mode == "cosine") {
    mode = qa::projection_mode::cosine;
    if (opt.pool.empty()) qa::fail(qa::errc::empty_input, "cosine mode needs --pool");
    pool = qa::load_pool(opt.pool, &vectors);
    models.pool = &pool;
  } else if (opt.mode == "classifier") {
    mode = qa::projection_mode::classifier;
    if (opt.model.empty()) qa::fail(qa::errc::empty_input, "classifier mode needs --model");
    if (templates.empty())
      qa::fail(qa::errc::empty_input, "classifier mode needs --templates");
    model = qa::load_model(opt.model);
    models.classifier = &model;
  } else {
    qa::fail(qa::errc::empty_input, "unknown mode " + opt.mode);
  }

  std::ofstream out(opt.out);
  if (!out) qa::fail(qa::errc::io_failure, "cannot write " + opt.out);
  std::size_t failures = 0;
  for (const auto& line : read_lines(opt.questions)) {
    if (line.empty()) {
      out << "\n";
      continue;
    }
    auto cols = split_tabs(line);
    const std::string& question = cols[0];
    std::string paragraph_id = cols.size() >= 3 ? cols[2] : "";
    try {
      auto program = qa::project(question, mode, models);
      out << qa::serialize_program(program);
    } catch (const qa::error&) {
      ++failures;  // blank line marks a question we could not project
    }
    if (!paragraph_id.empty()) out << "\t" << paragraph_id;
    out << "\n";
  }
  if (failures > 0) std::fprintf(stderr, "projection_failures=%zu\n", failures);
  return 0;
}

struct answer_options {
  std::string programs, corpus, out, trace;
};

int run_answer(const answer_options& opt) {
  auto corpus = qa::load_corpus(opt.corpus);
  std::unordered_map<std::string, const qa::annotated_paragraph*> by_id;
  for (const auto& para : corpus) by_id.emplace(para.id, &para);

  std::ofstream out(opt.out);
  if (!out) qa::fail(qa::errc::io_failure, "cannot write " + opt.out);
  std::ofstream trace_out;
  if (!opt.trace.empty()) {
    trace_out.open(opt.trace);
    if (!trace_out) qa::fail(qa::errc::io_failure, "cannot write " + opt.trace);
  }

  std::size_t errors = 0;
  std::size_t line_number = 0;
  for (const auto& line : read_lines(opt.programs)) {
    ++line_number;
    auto cols = split_tabs(line);
    std::string program_text, paragraph_id;
    if (cols.size() >= 4) {  // dataset file: question, program, paragraph, gold
      program_text = cols[1];
      paragraph_id = cols[2];
    } else if (cols.size() == 2) {  // program, paragraph
      program_text = cols[0];
      paragraph_id = cols[1];
    } else {
      program_text = "";
    }

    std::string text;
    try {
      if (program_text.empty()) qa::fail(qa::errc::empty_input, "no program");
      auto it = by_id.find(paragraph_id);
      if (it == by_id.end())
        qa::fail(qa::errc::validation_error, "unknown paragraph " + paragraph_id);
      auto program = qa::parse_program(program_text);
      auto [ans, trace] = qa::execute(program, *it->second);
      text = ans.text;
      if (trace_out.is_open()) {
        trace_out << "# " << line_number << "\n";
        for (const auto& node : trace)
          trace_out << node.path << "\t" << node.action << "\t" << node.output << "\n";
      }
    } catch (const qa::error&) {
      ++errors;  // empty answer is the error sentinel
      if (trace_out.is_open()) trace_out << "# " << line_number << " error\n";
    }
    out << line_number << "\t" << text << "\n";
  }
  if (errors > 0) std::fprintf(stderr, "execution_errors=%zu\n", errors);
  return 0;
}

struct eval_options {
  std::string pred, gold;
  bool by_skeleton = false;
};

int run_eval(const eval_options& opt) {
  std::unordered_map<std::string, std::string> predictions;
  for (const auto& line : read_lines(opt.pred)) {
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    predictions[cols[0]] = cols.size() > 1 ? cols[1] : "";
  }

  std::vector<qa::eval_item> items;
  std::size_t line_number = 0;
  for (const auto& line : read_lines(opt.gold)) {
    ++line_number;
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    qa::eval_item item;
    std::string id;
    if (cols.size() >= 4) {  // dataset file: ids are line numbers
      id = std::to_string(line_number);
      item.gold = cols[3];
      item.skeleton = qa::serialize_program(qa::skeletonize(qa::parse_program(cols[1])));
    } else {
      id = cols[0];
      item.gold = cols.size() > 1 ? cols[1] : "";
    }
    auto it = predictions.find(id);
    item.pred = it == predictions.end() ? "" : it->second;
    items.push_back(std::move(item));
  }

  auto rep = qa::report(items);
  std::printf("n=%zu em=%.4f f1=%.4f errors=%zu\n", rep.n, rep.em, rep.f1, rep.errors);
  if (opt.by_skeleton) {
    for (const auto& [skeleton, stats] : rep.per_skeleton)
      std::printf("%s\tn=%zu\tem=%.4f\tf1=%.4f\n", skeleton.c_str(), stats.n, stats.em,
                  stats.f1);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation-to-real question answering pipeline"};
  app.require_subcommand(1);

  generate_options gen;
  auto* cmd_generate = app.add_subcommand("generate", "build a synthetic dataset");
  cmd_generate->add_option("--templates", gen.templates)->required();
  cmd_generate->add_option("--corpus", gen.corpus)->required();
  cmd_generate->add_option("--out", gen.out)->required();
  cmd_generate->add_option("--n", gen.n)->required();
  cmd_generate->add_option("--seed", gen.seed)->required();
  cmd_generate->add_flag("--answers", gen.answers, "execute programs to fill gold answers");

  train_options tr;
  auto* cmd_train = app.add_subcommand("train", "train the skeleton classifier");
  cmd_train->add_option("--data", tr.data)->required();
  cmd_train->add_option("--vectors", tr.vectors)->required();
  cmd_train->add_option("--model", tr.model)->required();
  cmd_train->add_option("--epochs", tr.config.epochs);
  cmd_train->add_option("--lr", tr.config.learning_rate);
  cmd_train->add_option("--l2", tr.config.l2);
  cmd_train->add_option("--seed", tr.config.seed);
  cmd_train->add_option("--holdout", tr.holdout, "tail fraction scored after training");

  project_options pr;
  auto* cmd_project = app.add_subcommand("project", "map questions to programs");
  cmd_project->add_option("--model", pr.model);
  cmd_project->add_option("--pool", pr.pool);
  cmd_project->add_option("--vectors", pr.vectors)->required();
  cmd_project->add_option("--questions", pr.questions)->required();
  cmd_project->add_option("--out", pr.out)->required();
  cmd_project->add_option("--mode", pr.mode)->check(CLI::IsMember({"cosine", "classifier"}));
  cmd_project->add_option("--templates", pr.templates);

  answer_options an;
  auto* cmd_answer = app.add_subcommand("answer", "execute programs over a corpus");
  cmd_answer->add_option("--programs", an.programs)->required();
  cmd_answer->add_option("--corpus", an.corpus)->required();
  cmd_answer->add_option("--out", an.out)->required();
  cmd_answer->add_option("--trace", an.trace);

  eval_options ev;
  auto* cmd_eval = app.add_subcommand("eval", "score predictions against gold answers");
  cmd_eval->add_option("--pred", ev.pred)->required();
  cmd_eval->add_option("--gold", ev.gold)->required();
  cmd_eval->add_flag("--by-skeleton", ev.by_skeleton);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_generate->parsed()) return run_generate(gen);
    if (cmd_train->parsed()) return run_train(tr);
    if (cmd_project->parsed()) return run_project(pr);
    if (cmd_answer->parsed()) return run_answer(an);
    if (cmd_eval->parsed()) return run_eval(ev);
  } catch (const qa::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
