// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <json.hpp>

#include "reviewranker/kernels.hpp"
#include "reviewranker/ranker.hpp"

namespace reviewranker::ranker {

std::string run_report_json(const PipelineResult& result, const PipelineOptions& options) {
  using json = nlohmann::ordered_json;
  json report;
  report["seed"] = options.seed;
  report["k"] = options.k;
  report["stratified"] = options.stratify;
  report["kernels"] = std::string(kernels::isa_name(kernels::active().isa));

  const auto& tc = options.train;
  report["config"] = {
      {"hidden_sizes", tc.hidden_sizes}, {"dropout_rate", tc.dropout_rate},
      {"learning_rate", tc.learning_rate}, {"beta1", tc.beta1},
      {"beta2", tc.beta2}, {"epsilon", tc.epsilon},
      {"epochs", tc.epochs}, {"batch_size", tc.batch_size},
      {"stem", options.preprocess.stem}, {"collapse_synonyms", options.preprocess.collapse_synonyms},
      {"synonym_entries", options.synonyms.size()},
  };

  report["reviews"] = result.records.size();
  report["trainable"] = result.trainable;
  report["excluded"] = result.excluded;
  report["vocabulary_size"] = result.vocabulary_size;
  report["oov"] = {{"tokens", result.oov.tokens}, {"reviews", result.oov.reviews}};
  report["empty_token_reviews"] = result.empty_token_reviews;

  json classes = json::object();
  json mean = json::object();
  for (TaskKind task : kTasks) {
    const auto t = static_cast<std::size_t>(task);
    classes[std::string(task_name(task))] = result.class_counts[t];
    mean[std::string(task_name(task))] = result.mean_accuracy[t];
  }
  report["class_counts"] = classes;
  report["mean_validation_accuracy"] = mean;

  json folds = json::array();
  for (const auto& f : result.folds) {
    json entry;
    entry["fold"] = f.fold;
    entry["train_size"] = f.train_size;
    entry["validation_size"] = f.validation_size;
    for (TaskKind task : kTasks) {
      const auto t = static_cast<std::size_t>(task);
      entry["models"][std::string(task_name(task))] = {
          {"accuracy", f.accuracy[t]},
          {"train_class_counts", f.train_class_counts[t]},
          {"validation_class_counts", f.validation_class_counts[t]},
      };
    }
    folds.push_back(std::move(entry));
  }
  report["folds"] = std::move(folds);
  return report.dump(2) + "\n";
}

}  // namespace reviewranker::ranker
