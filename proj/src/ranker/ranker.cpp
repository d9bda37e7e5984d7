// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include "reviewranker/ranker.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "reviewranker/csv.hpp"

namespace reviewranker::ranker {

std::size_t num_classes(TaskKind task) noexcept { return task == TaskKind::Operation ? 3 : 2; }

std::string_view task_name(TaskKind task) noexcept {
  switch (task) {
    case TaskKind::AddCode: return "add";
    case TaskKind::RemoveCode: return "remove";
    case TaskKind::Operation: return "operation";
  }
  return "?";
}

std::size_t task_label(TaskKind task, const corpus::ReviewLabel& label) {
  switch (task) {
    case TaskKind::AddCode: return label.add_understood ? 1 : 0;
    case TaskKind::RemoveCode: return label.remove_understood ? 1 : 0;
    case TaskKind::Operation: return corpus::operation_class(label.operation);
  }
  return 0;
}

double ground_truth_confidence(const nn::ProbabilityDistribution& probs, std::size_t true_class) {
  if (true_class >= probs.size()) {
    throw std::out_of_range("true class " + std::to_string(true_class) + " out of range for " +
                            std::to_string(probs.size()) + " classes");
  }
  return probs.probs[true_class];
}

double combine_confidence(double c1, double c2, double c3) {
  for (double c : {c1, c2, c3}) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument("confidence components must lie in [0, 1]");
    }
  }
  const double lo = std::min({c1, c2, c3});
  const double hi = std::max({c1, c2, c3});
  return std::clamp(std::cbrt(c1 * c2 * c3), lo, hi);
}

FoldAssignment::FoldAssignment(std::size_t k, std::vector<std::vector<std::string>> members)
    : members_(std::move(members)) {
  if (members_.size() != k) throw std::invalid_argument("fold count mismatch");
  for (std::size_t f = 0; f < members_.size(); ++f) {
    for (const auto& id : members_[f]) {
      if (!fold_of_.emplace(id, f + 1).second) {
        throw std::invalid_argument("id '" + id + "' assigned to two folds");
      }
    }
  }
}

std::size_t FoldAssignment::fold_of(const std::string& id) const {
  auto it = fold_of_.find(id);
  if (it == fold_of_.end()) throw std::out_of_range("id not in fold assignment: " + id);
  return it->second;
}

const std::vector<std::string>& FoldAssignment::members(std::size_t fold) const {
  if (fold == 0 || fold > members_.size()) throw std::out_of_range("fold out of range");
  return members_[fold - 1];
}

namespace {

void check_fold_args(std::size_t n, std::size_t k) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  if (n < k) {
    throw std::invalid_argument("cannot split " + std::to_string(n) + " reviews into " +
                                std::to_string(k) + " folds");
  }
}

}  // namespace

FoldAssignment make_folds(std::span<const std::string> ids, std::size_t k, std::uint64_t seed) {
  check_fold_args(ids.size(), k);
  std::vector<std::string> order(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));

  const std::size_t base = order.size() / k;
  const std::size_t extra = order.size() % k;
  std::vector<std::vector<std::string>> members(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    members[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                      order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return FoldAssignment(k, std::move(members));
}

FoldAssignment make_stratified_folds(std::span<const std::string> ids,
                                     std::span<const std::size_t> strata, std::size_t k,
                                     std::uint64_t seed) {
  check_fold_args(ids.size(), k);
  if (strata.size() != ids.size()) throw std::invalid_argument("one stratum per id required");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return strata[a] < strata[b]; });
  std::vector<std::vector<std::string>> members(k);
  for (std::size_t p = 0; p < order.size(); ++p) members[p % k].push_back(ids[order[p]]);
  return FoldAssignment(k, std::move(members));
}

namespace {

struct FoldOutcome {
  FoldReport report;
  std::vector<std::pair<std::size_t, ConfidenceRecord>> records;  // (entry index, record)
};

FoldOutcome run_fold(std::size_t fold, const std::vector<std::size_t>& train_idx,
                     const std::vector<std::size_t>& valid_idx,
                     const std::vector<std::vector<double>>& features,
                     const corpus::LabeledCorpus& corpus, const PipelineOptions& options) {
  FoldOutcome out;
  out.report.fold = fold;
  out.report.train_size = train_idx.size();
  out.report.validation_size = valid_idx.size();

  nn::TrainConfig config = options.train;
  config.seed = options.seed + fold;

  std::array<std::vector<nn::ProbabilityDistribution>, 3> predictions;
  for (TaskKind task : kTasks) {
    const auto t = static_cast<std::size_t>(task);
    nn::Dataset train_set;
    train_set.num_classes = num_classes(task);
    out.report.train_class_counts[t].assign(train_set.num_classes, 0);
    for (std::size_t i : train_idx) {
      train_set.inputs.emplace_back(features[i]);
      const std::size_t y = task_label(task, corpus.entries[i].label);
      train_set.labels.push_back(y);
      ++out.report.train_class_counts[t][y];
    }
    const nn::ModelParams model = nn::train(train_set, config);

    out.report.validation_class_counts[t].assign(train_set.num_classes, 0);
    std::size_t correct = 0;
    for (std::size_t i : valid_idx) {
      auto probs = nn::predict_proba(model, features[i]);
      const std::size_t y = task_label(task, corpus.entries[i].label);
      ++out.report.validation_class_counts[t][y];
      if (probs.argmax() == y) ++correct;
      predictions[t].push_back(std::move(probs));
    }
    out.report.accuracy[t] =
        valid_idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(valid_idx.size());
  }

  for (std::size_t v = 0; v < valid_idx.size(); ++v) {
    const auto& entry = corpus.entries[valid_idx[v]];
    ConfidenceRecord rec;
    rec.review_id = entry.review.id;
    const double c_add = ground_truth_confidence(
        predictions[0][v], task_label(TaskKind::AddCode, entry.label));
    const double c_remove = ground_truth_confidence(
        predictions[1][v], task_label(TaskKind::RemoveCode, entry.label));
    const double c_op = ground_truth_confidence(
        predictions[2][v], task_label(TaskKind::Operation, entry.label));
    rec.c_add = c_add;
    rec.c_remove = c_remove;
    rec.c_operation = c_op;
    rec.score = combine_confidence(c_add, c_remove, c_op);
    out.records.emplace_back(valid_idx[v], std::move(rec));
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const corpus::LabeledCorpus& corpus, const PipelineOptions& options) {
  options.train.validate();
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  PipelineResult result;
  const std::size_t n = corpus.size();
  result.records.resize(n);

  std::vector<textprep::TokenSequence> tokens;
  tokens.reserve(n);
  for (const auto& e : corpus.entries) {
    tokens.push_back(textprep::preprocess_review(e.review.text, options.synonyms, options.preprocess));
    if (tokens.back().empty()) result.empty_token_reviews.push_back(e.review.id);
  }
  const textprep::Vocabulary vocab = textprep::build_vocabulary(tokens);
  result.vocabulary_size = vocab.size();
  log("vocabulary size " + std::to_string(vocab.size()));

  std::vector<std::size_t> trainable;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = corpus.entries[i];
    if (e.label.operation == corpus::OperationType::NotEnoughInformation) {
      auto& rec = result.records[i];
      rec.review_id = e.review.id;
      rec.score = 0.0;
      rec.excluded = true;
      ++result.excluded;
    } else {
      trainable.push_back(i);
    }
  }
  result.trainable = trainable.size();
  for (TaskKind task : kTasks) {
    auto& counts = result.class_counts[static_cast<std::size_t>(task)];
    counts.assign(num_classes(task), 0);
    for (std::size_t i : trainable) ++counts[task_label(task, corpus.entries[i].label)];
  }
  if (trainable.empty()) {
    log("no trainable reviews; nothing to train");
    return result;
  }
  if (vocab.empty()) throw PipelineError("vocabulary is empty; every review preprocessed to nothing");

  std::vector<std::vector<double>> features(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = vectorizer::vectorize(tokens[i], vocab, &result.oov).as_doubles();
  }

  std::vector<std::string> ids;
  std::vector<std::size_t> strata;
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i : trainable) {
    ids.push_back(corpus.entries[i].review.id);
    strata.push_back(corpus::operation_class(corpus.entries[i].label.operation));
    index_of.emplace(ids.back(), i);
  }
  FoldAssignment folds;
  try {
    folds = options.stratify ? make_stratified_folds(ids, strata, options.k, options.seed)
                             : make_folds(ids, options.k, options.seed);
  } catch (const std::invalid_argument& err) {
    throw PipelineError(err.what());
  }

  const std::size_t k = options.k;
  std::vector<std::vector<std::size_t>> train_idx(k + 1), valid_idx(k + 1);
  for (std::size_t f = 1; f <= k; ++f) {
    for (const auto& id : folds.members(f)) valid_idx[f].push_back(index_of.at(id));
    for (std::size_t i : trainable) {
      if (folds.fold_of(corpus.entries[i].review.id) != f) train_idx[f].push_back(i);
    }
    for (TaskKind task : kTasks) {
      std::vector<std::size_t> seen(num_classes(task), 0);
      for (std::size_t i : train_idx[f]) ++seen[task_label(task, corpus.entries[i].label)];
      for (std::size_t c = 0; c < seen.size(); ++c) {
        if (seen[c] == 0) {
          throw PipelineError("fold " + std::to_string(f) + ", model " +
                              std::string(task_name(task)) + ": training split has no samples of class " +
                              std::to_string(c));
        }
      }
      if (options.audit) {
        std::vector<std::string> train_ids;
        for (std::size_t i : train_idx[f]) train_ids.push_back(corpus.entries[i].review.id);
        options.audit(f, task, train_ids);
      }
    }
  }

  std::vector<FoldOutcome> outcomes(k + 1);
  std::vector<std::exception_ptr> errors(k + 1);
  std::atomic<std::size_t> next{1};
  std::mutex log_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t f = next.fetch_add(1);
      if (f > k) return;
      try {
        outcomes[f] = run_fold(f, train_idx[f], valid_idx[f], features, corpus, options);
        std::lock_guard lock(log_mutex);
        std::ostringstream msg;
        msg << "fold " << f << "/" << k << ": accuracy add=" << outcomes[f].report.accuracy[0]
            << " remove=" << outcomes[f].report.accuracy[1]
            << " operation=" << outcomes[f].report.accuracy[2];
        log(msg.str());
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, k);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  for (std::size_t f = 1; f <= k; ++f) {
    for (auto& [idx, rec] : outcomes[f].records) result.records[idx] = std::move(rec);
    for (std::size_t t = 0; t < 3; ++t) result.mean_accuracy[t] += outcomes[f].report.accuracy[t];
    result.folds.push_back(std::move(outcomes[f].report));
  }
  for (double& a : result.mean_accuracy) a /= static_cast<double>(k);
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::optional<double> parse_optional_double(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_scores(std::span<const ConfidenceRecord> records) {
  std::string out = "review_id,c_add,c_remove,c_operation,score,excluded\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : records) {
    out += csv::format_row({r.review_id, opt(r.c_add), opt(r.c_remove), opt(r.c_operation),
                            format_double(r.score), r.excluded ? "1" : "0"});
  }
  return out;
}

void export_scores(std::span<const ConfidenceRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write scores file: " + path.string());
  out << format_scores(records);
  out.flush();
  if (!out) throw std::runtime_error("failed writing scores file: " + path.string());
}

std::vector<ConfidenceRecord> parse_scores(std::string_view content) {
  auto rows = csv::parse(content);
  if (rows.empty()) throw std::runtime_error("scores file is empty");
  const std::vector<std::string> header = {"review_id", "c_add",  "c_remove",
                                           "c_operation", "score", "excluded"};
  if (rows[0].fields != header) throw std::runtime_error("unexpected scores header");
  std::vector<ConfidenceRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != header.size()) {
      throw std::runtime_error("line " + std::to_string(rows[r].line) + ": expected 6 fields");
    }
    ConfidenceRecord rec;
    rec.review_id = f[0];
    rec.c_add = parse_optional_double(f[1], rows[r].line);
    rec.c_remove = parse_optional_double(f[2], rows[r].line);
    rec.c_operation = parse_optional_double(f[3], rows[r].line);
    rec.score = parse_optional_double(f[4], rows[r].line).value_or(0.0);
    rec.excluded = f[5] == "1";
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace reviewranker::ranker
