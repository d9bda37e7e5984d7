// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Labeling workflow: every labeler gets a shared pool (labeled by everyone,
// for agreement checks) plus a private slice of the remaining reviews.
// Submissions go to an append-only JSON-lines log; the current label of a
// (review, labeler) pair is the latest one in the log.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reviewranker/corpus.hpp"

namespace reviewranker::labelserve {

/// Reserved labeler id for tie-break decisions; its label overrides all
/// others for that review at export time.
inline constexpr const char* kAdminLabeler = "admin";

struct LabelingSession {
  std::string labeler_id;
  std::vector<std::string> assigned_ids;  // shared pool first, then the private slice
  std::set<std::string> completed_ids;

  std::size_t completed() const noexcept { return completed_ids.size(); }
  std::size_t assigned() const noexcept { return assigned_ids.size(); }
};

struct Assignment {
  std::vector<std::string> shared_pool;
  std::vector<LabelingSession> sessions;  // in labeler order

  const LabelingSession* find(const std::string& labeler) const;
};

/// Seeded random shared pool of ceil(shared_fraction * N) ids for every
/// labeler; the rest is split into near-equal disjoint slices. Throws
/// std::invalid_argument for an empty corpus, no labelers, duplicate labelers
/// or a fraction outside [0, 1).
Assignment assign_reviews(std::span<const std::string> ids, std::span<const std::string> labelers,
                          double shared_fraction, std::uint64_t seed);

struct FieldError {
  std::string field;
  std::string message;
};

/// Checks a submission against the form rules: snippet fields are only usable
/// for the operations that enable them and only when the matching question is
/// answered "understood"; NotEnoughInformation takes no answers at all.
/// Returns hard errors; soft notes go to `warnings`.
std::vector<FieldError> validate_submission(const corpus::ReviewLabel& label,
                                            std::vector<std::string>* warnings = nullptr);

struct Submission {
  std::uint64_t sequence = 0;
  std::string review_id;
  std::string labeler_id;
  corpus::ReviewLabel label;
};

/// Append-only log with a latest-wins view. Appends are serialized and
/// flushed to disk before append() returns.
class LabelStore {
 public:
  /// Opens (creating if needed) the log at `path` and replays it. A torn
  /// final line is ignored and reported through `warnings`.
  explicit LabelStore(std::filesystem::path path, std::vector<std::string>* warnings = nullptr);

  Submission append(const std::string& review_id, const std::string& labeler_id,
                    const corpus::ReviewLabel& label);

  /// Latest label per labeler for one review, keyed by labeler id.
  std::map<std::string, corpus::ReviewLabel> labels_for(const std::string& review_id) const;
  std::optional<corpus::ReviewLabel> latest(const std::string& review_id,
                                            const std::string& labeler_id) const;
  std::set<std::string> reviews_labeled_by(const std::string& labeler_id) const;
  /// (review_id, labeler_id) -> latest label.
  const std::map<std::pair<std::string, std::string>, corpus::ReviewLabel>& view() const noexcept {
    return view_;
  }
  std::size_t log_size() const noexcept { return log_size_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void apply(const Submission& s);

  std::filesystem::path path_;
  std::map<std::pair<std::string, std::string>, corpus::ReviewLabel> view_;
  std::uint64_t next_sequence_ = 1;
  std::size_t log_size_ = 0;
};

struct Disagreement {
  std::string review_id;
  std::vector<std::string> questions;  // "operation", "add_understood", "remove_understood"
  std::map<std::string, corpus::ReviewLabel> answers;
};

struct AgreementReport {
  std::vector<std::string> shared_pool;
  std::size_t reviews_compared = 0;  // shared reviews with >= 2 labelers
  // nullopt when no shared review has two labels yet.
  std::optional<double> operation_rate;
  std::optional<double> add_rate;
  std::optional<double> remove_rate;
  std::vector<Disagreement> disagreements;
};

AgreementReport agreement_report(const LabelStore& store, std::span<const std::string> shared_pool);

struct ExportResult {
  corpus::LabeledCorpus corpus;
  std::vector<std::string> majority_resolved;  // non-unanimous reviews settled by vote
};

class ExportBlocked : public std::runtime_error {
 public:
  explicit ExportBlocked(std::vector<std::string> ids);
  const std::vector<std::string>& review_ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

/// One entry per labeled review, in `reviews` order. Multiple labelers are
/// combined by per-question majority; a tie on any question blocks the export
/// (ExportBlocked) until an admin label is submitted for that review.
ExportResult export_labels(const LabelStore& store, std::span<const corpus::Review> reviews);

class UnknownLabeler : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NotAssigned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InvalidLabel : public std::runtime_error {
 public:
  explicit InvalidLabel(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const noexcept { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

struct Progress {
  std::size_t completed = 0;
  std::size_t assigned = 0;
};

struct NextReview {
  std::optional<corpus::Review> review;  // nullopt when the session is done
  Progress progress;
};

struct SubmitResult {
  Progress progress;
  std::vector<std::string> warnings;
};

/// Thread-safe labeling service over a data directory containing
/// reviews.jsonl, assignment.json and labels.jsonl.
class LabelService {
 public:
  /// Opens an initialized data directory.
  explicit LabelService(const std::filesystem::path& data_dir);

  static bool is_initialized(const std::filesystem::path& data_dir);
  /// Writes reviews and a fresh assignment into `data_dir`. Throws if the
  /// directory already holds an assignment.
  static void initialize(const std::filesystem::path& data_dir,
                         std::span<const corpus::Review> reviews,
                         std::span<const std::string> labelers, double shared_fraction,
                         std::uint64_t seed);

  LabelingSession session(const std::string& labeler_id) const;
  NextReview next_unlabeled(const std::string& labeler_id) const;
  SubmitResult submit_label(const std::string& review_id, const std::string& labeler_id,
                            corpus::ReviewLabel label);
  /// Records an admin decision for a review (any review in the corpus).
  void resolve(const std::string& review_id, corpus::ReviewLabel label);

  AgreementReport agreement() const;
  ExportResult export_corpus() const;

  const std::vector<corpus::Review>& reviews() const noexcept { return reviews_; }
  const Assignment& assignment() const noexcept { return assignment_; }
  std::vector<std::string> warnings() const;

 private:
  const LabelingSession& session_ref(const std::string& labeler_id) const;
  Progress progress_locked(const LabelingSession& s) const;

  std::vector<corpus::Review> reviews_;
  std::map<std::string, std::size_t> review_index_;
  Assignment assignment_;
  std::vector<std::string> warnings_;
  mutable std::shared_mutex mutex_;
  LabelStore store_;
};

}  // namespace reviewranker::labelserve
