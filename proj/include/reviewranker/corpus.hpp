// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reviewranker::corpus {

/// Change type a review asks for. The numeric values are the class codes the
/// operation model is trained on; NotEnoughInformation has no class.
enum class OperationType : int {
  Replace = 0,
  Delete = 1,
  Insert = 2,
  NotEnoughInformation = -1,
};

/// Class index of a trainable operation. Throws for NotEnoughInformation.
std::size_t operation_class(OperationType op);
OperationType operation_from_class(std::size_t cls);

/// Parses "0", "1", "2", "NEI" (and the spelled-out names, case-insensitive).
std::optional<OperationType> parse_operation(std::string_view text);
/// Canonical file-format spelling: "0", "1", "2" or "NEI".
std::string operation_code(OperationType op);
std::string_view operation_name(OperationType op);

struct Review {
  std::string id;
  std::string text;
  std::string project;
  std::vector<std::string> context_urls;

  friend bool operator==(const Review&, const Review&) = default;
};

struct ReviewLabel {
  OperationType operation = OperationType::NotEnoughInformation;
  bool add_understood = false;
  bool remove_understood = false;
  std::string add_snippet;
  std::string remove_snippet;
  std::string labeler_id;
  std::string labeled_at;  // ISO-8601, may be empty for imported corpora

  friend bool operator==(const ReviewLabel&, const ReviewLabel&) = default;
};

/// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> check_label_invariants(const ReviewLabel& label);

struct Entry {
  Review review;
  ReviewLabel label;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct LabeledCorpus {
  std::vector<Entry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  friend bool operator==(const LabeledCorpus&, const LabeledCorpus&) = default;
};

enum class Format { Csv, Jsonl };

std::optional<Format> parse_format(std::string_view name);
/// Picks the format from a file extension (.jsonl/.json → Jsonl, else Csv).
Format format_for_path(const std::filesystem::path& path);

/// One problem found while reading an input file.
struct RecordIssue {
  std::size_t line = 0;
  std::string field;
  std::string message;
};

class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(const std::string& what, std::vector<RecordIssue> issues = {})
      : std::runtime_error(what), issues_(std::move(issues)) {}
  const std::vector<RecordIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<RecordIssue> issues_;
};

/// Reads a labeled corpus. Every malformed record is collected and reported
/// together in a CorpusError; duplicate ids are a hard error. Non-fatal
/// observations (e.g. an empty file) are appended to `warnings`.
LabeledCorpus load_corpus(const std::filesystem::path& path, Format format,
                          std::vector<std::string>* warnings = nullptr);
LabeledCorpus parse_corpus(std::string_view content, Format format,
                           std::vector<std::string>* warnings = nullptr);

void write_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path,
                  Format format);
std::string serialize_corpus(const LabeledCorpus& corpus, Format format);

/// Reads review records without labels (id, text, project, context_urls).
/// Used to seed the labeling service.
std::vector<Review> load_reviews(const std::filesystem::path& path, Format format);

/// Case-folded, whitespace-collapsed text used as the duplicate key.
std::string normalized_text(std::string_view text);

/// Keeps the first entry for each normalized text.
LabeledCorpus deduplicate(const LabeledCorpus& corpus);

struct Partition {
  LabeledCorpus trainable;
  LabeledCorpus excluded;
};

/// Splits off the NotEnoughInformation entries, preserving order.
Partition partition_by_labelability(const LabeledCorpus& corpus);

struct LintWarning {
  std::string review_id;
  std::string message;
};

/// Flags entries whose understanding answers do not follow the usual pattern
/// for their operation. Advisory only.
std::vector<LintWarning> lint_labels(const LabeledCorpus& corpus);

}  // namespace reviewranker::corpus
