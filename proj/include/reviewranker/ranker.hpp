// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reviewranker/corpus.hpp"
#include "reviewranker/neuralnet.hpp"
#include "reviewranker/textprep.hpp"
#include "reviewranker/vectorizer.hpp"

namespace reviewranker::ranker {

/// The three questions a developer answers about a review.
enum class TaskKind : std::size_t {
  AddCode = 0,     // did you understand what to insert? (2 classes)
  RemoveCode = 1,  // did you understand what to delete? (2 classes)
  Operation = 2,   // replace / delete / insert (3 classes)
};

inline constexpr std::array<TaskKind, 3> kTasks = {TaskKind::AddCode, TaskKind::RemoveCode,
                                                   TaskKind::Operation};

std::size_t num_classes(TaskKind task) noexcept;
std::string_view task_name(TaskKind task) noexcept;
/// Ground-truth class of `label` for `task`. Throws for NotEnoughInformation.
std::size_t task_label(TaskKind task, const corpus::ReviewLabel& label);

/// probs[true_class]; throws std::out_of_range for a bad index.
double ground_truth_confidence(const nn::ProbabilityDistribution& probs, std::size_t true_class);

/// Geometric mean (c1 * c2 * c3)^(1/3). Inputs must lie in [0, 1]; the
/// result is clamped to [min, max] of the inputs.
double combine_confidence(double c1, double c2, double c3);

/// Review id -> fold number in 1..k.
class FoldAssignment {
 public:
  FoldAssignment() = default;
  FoldAssignment(std::size_t k, std::vector<std::vector<std::string>> members);

  std::size_t k() const noexcept { return members_.size(); }
  /// Fold of `id` (1-based); throws std::out_of_range for unknown ids.
  std::size_t fold_of(const std::string& id) const;
  /// Members of fold `fold` (1-based), in assignment order.
  const std::vector<std::string>& members(std::size_t fold) const;
  std::size_t size() const noexcept { return fold_of_.size(); }

  friend bool operator==(const FoldAssignment& a, const FoldAssignment& b) {
    return a.members_ == b.members_;
  }

 private:
  std::vector<std::vector<std::string>> members_;
  std::unordered_map<std::string, std::size_t> fold_of_;
};

/// Seeded uniform random partition into k folds whose sizes differ by at most
/// one; the first |ids| mod k folds get the extra member. Throws
/// std::invalid_argument if k < 2 or |ids| < k.
FoldAssignment make_folds(std::span<const std::string> ids, std::size_t k, std::uint64_t seed);

/// Like make_folds, but members of each stratum are dealt round-robin so
/// every fold sees a similar class mix. `strata[i]` is the stratum of ids[i].
FoldAssignment make_stratified_folds(std::span<const std::string> ids,
                                     std::span<const std::size_t> strata, std::size_t k,
                                     std::uint64_t seed);

struct ConfidenceRecord {
  std::string review_id;
  std::optional<double> c_add;
  std::optional<double> c_remove;
  std::optional<double> c_operation;
  double score = 0.0;
  bool excluded = false;
};

/// Raised when a training split cannot be used, e.g. a class is missing.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Called once per (fold, task) with the ids the model is trained on, before
/// any training starts.
using TrainingAudit =
    std::function<void(std::size_t fold, TaskKind task, std::span<const std::string> ids)>;

struct PipelineOptions {
  nn::TrainConfig train;
  std::size_t k = 10;
  std::uint64_t seed = 42;
  bool stratify = false;
  std::size_t threads = 1;  // folds trained concurrently
  textprep::SynonymMap synonyms = textprep::SynonymMap::builtin();
  textprep::PreprocessOptions preprocess;
  TrainingAudit audit;
  std::function<void(const std::string&)> log;
};

struct FoldReport {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::array<double, 3> accuracy{};
  std::array<std::vector<std::size_t>, 3> train_class_counts;
  std::array<std::vector<std::size_t>, 3> validation_class_counts;
};

struct PipelineResult {
  std::vector<ConfidenceRecord> records;  // one per corpus entry, corpus order
  std::vector<FoldReport> folds;
  std::array<double, 3> mean_accuracy{};
  std::array<std::vector<std::size_t>, 3> class_counts;  // over trainable reviews
  std::size_t vocabulary_size = 0;
  vectorizer::OovTally oov;
  std::vector<std::string> empty_token_reviews;
  std::size_t trainable = 0;
  std::size_t excluded = 0;
};

/// Scores every review: NotEnoughInformation reviews get score 0 and are
/// never trained on; the rest are scored k-fold style, each one only while
/// its fold is held out.
PipelineResult run_pipeline(const corpus::LabeledCorpus& corpus, const PipelineOptions& options);

/// CSV: review_id,c_add,c_remove,c_operation,score,excluded
std::string format_scores(std::span<const ConfidenceRecord> records);
void export_scores(std::span<const ConfidenceRecord> records, const std::filesystem::path& path);
std::vector<ConfidenceRecord> parse_scores(std::string_view content);

/// JSON run report: folds, accuracies, class counts, vocabulary size, OOV
/// tally, configuration and seed.
std::string run_report_json(const PipelineResult& result, const PipelineOptions& options);

}  // namespace reviewranker::ranker
