// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json_codec.hpp"
#include "reviewranker/labelserve.hpp"

namespace reviewranker::labelserve {

using corpus::OperationType;
using corpus::ReviewLabel;

namespace {

constexpr const char* kReviewsFile = "reviews.jsonl";
constexpr const char* kAssignmentFile = "assignment.json";
constexpr const char* kLogFile = "labels.jsonl";

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

// Winner of a vote, or nullopt on a tie for first place.
template <typename T>
std::optional<T> majority(const std::vector<T>& votes) {
  std::map<T, std::size_t> counts;
  for (const auto& v : votes) ++counts[v];
  std::optional<T> best;
  std::size_t best_count = 0;
  bool tie = false;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
      tie = false;
    } else if (count == best_count) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

std::map<std::string, ReviewLabel> labeler_votes(const LabelStore& store, const std::string& id) {
  auto labels = store.labels_for(id);
  labels.erase(kAdminLabeler);
  return labels;
}

}  // namespace

AgreementReport agreement_report(const LabelStore& store, std::span<const std::string> shared_pool) {
  AgreementReport report;
  report.shared_pool.assign(shared_pool.begin(), shared_pool.end());
  std::size_t op_agree = 0, add_agree = 0, remove_agree = 0;
  for (const auto& id : shared_pool) {
    auto labels = labeler_votes(store, id);
    if (labels.size() < 2) continue;
    ++report.reviews_compared;
    const ReviewLabel& first = labels.begin()->second;
    bool op_same = true, add_same = true, remove_same = true;
    for (const auto& [labeler, label] : labels) {
      op_same = op_same && label.operation == first.operation;
      add_same = add_same && label.add_understood == first.add_understood;
      remove_same = remove_same && label.remove_understood == first.remove_understood;
    }
    op_agree += op_same;
    add_agree += add_same;
    remove_agree += remove_same;
    if (!(op_same && add_same && remove_same)) {
      Disagreement d;
      d.review_id = id;
      if (!op_same) d.questions.push_back("operation");
      if (!add_same) d.questions.push_back("add_understood");
      if (!remove_same) d.questions.push_back("remove_understood");
      d.answers = std::move(labels);
      report.disagreements.push_back(std::move(d));
    }
  }
  if (report.reviews_compared > 0) {
    const auto n = static_cast<double>(report.reviews_compared);
    report.operation_rate = static_cast<double>(op_agree) / n;
    report.add_rate = static_cast<double>(add_agree) / n;
    report.remove_rate = static_cast<double>(remove_agree) / n;
  }
  return report;
}

ExportBlocked::ExportBlocked(std::vector<std::string> ids)
    : std::runtime_error("export blocked by unresolved ties on review(s): " + join(ids)),
      ids_(std::move(ids)) {}

InvalidLabel::InvalidLabel(std::vector<FieldError> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid label:";
        for (const auto& e : errors) msg += " " + e.field + ": " + e.message + ";";
        return msg;
      }()),
      errors_(std::move(errors)) {}

ExportResult export_labels(const LabelStore& store, std::span<const corpus::Review> reviews) {
  ExportResult result;
  std::vector<std::string> blocked;
  for (const auto& review : reviews) {
    auto all = store.labels_for(review.id);
    if (all.empty()) continue;
    corpus::Entry entry{review, {}};

    if (auto admin = all.find(kAdminLabeler); admin != all.end()) {
      entry.label = admin->second;
      result.corpus.entries.push_back(std::move(entry));
      continue;
    }
    if (all.size() == 1) {
      entry.label = all.begin()->second;
      result.corpus.entries.push_back(std::move(entry));
      continue;
    }

    std::vector<int> ops;
    std::vector<bool> adds, removes;
    for (const auto& [labeler, label] : all) {
      ops.push_back(static_cast<int>(label.operation));
      adds.push_back(label.add_understood);
      removes.push_back(label.remove_understood);
    }
    auto op = majority(ops);
    auto add = majority(adds);
    auto remove = majority(removes);
    if (!op || !add || !remove) {
      blocked.push_back(review.id);
      continue;
    }
    ReviewLabel combined;
    combined.operation = static_cast<OperationType>(*op);
    combined.add_understood = *add;
    combined.remove_understood = *remove;
    if (combined.operation == OperationType::NotEnoughInformation) {
      combined.add_understood = combined.remove_understood = false;
    }
    combined.labeler_id = "majority";
    bool unanimous = true;
    for (const auto& [labeler, label] : all) {
      const bool matches = label.operation == combined.operation &&
                           label.add_understood == combined.add_understood &&
                           label.remove_understood == combined.remove_understood;
      unanimous = unanimous && matches;
      if (matches && combined.add_snippet.empty() && combined.remove_snippet.empty()) {
        combined.add_snippet = label.add_snippet;
        combined.remove_snippet = label.remove_snippet;
      }
      combined.labeled_at = std::max(combined.labeled_at, label.labeled_at);
    }
    if (unanimous) {
      combined.labeler_id = all.begin()->first;
    } else {
      result.majority_resolved.push_back(review.id);
    }
    entry.label = std::move(combined);
    result.corpus.entries.push_back(std::move(entry));
  }
  if (!blocked.empty()) throw ExportBlocked(std::move(blocked));
  return result;
}

bool LabelService::is_initialized(const std::filesystem::path& data_dir) {
  return std::filesystem::exists(data_dir / kAssignmentFile) &&
         std::filesystem::exists(data_dir / kReviewsFile);
}

void LabelService::initialize(const std::filesystem::path& data_dir,
                              std::span<const corpus::Review> reviews,
                              std::span<const std::string> labelers, double shared_fraction,
                              std::uint64_t seed) {
  if (is_initialized(data_dir)) {
    throw std::runtime_error("data directory already initialized: " + data_dir.string());
  }
  std::vector<std::string> ids;
  for (const auto& r : reviews) ids.push_back(r.id);
  Assignment assignment = assign_reviews(ids, labelers, shared_fraction, seed);

  std::error_code ec;
  std::filesystem::create_directories(data_dir, ec);
  if (ec) throw std::runtime_error("cannot create data directory: " + ec.message());

  {
    std::ofstream out(data_dir / kReviewsFile, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("data directory is not writable: " + data_dir.string());
    for (const auto& r : reviews) out << detail::review_to_json(r).dump() << "\n";
  }
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["shared_fraction"] = shared_fraction;
  j["shared_pool"] = assignment.shared_pool;
  j["sessions"] = nlohmann::ordered_json::array();
  for (const auto& s : assignment.sessions) {
    j["sessions"].push_back({{"labeler_id", s.labeler_id}, {"assigned_ids", s.assigned_ids}});
  }
  std::ofstream out(data_dir / kAssignmentFile, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("data directory is not writable: " + data_dir.string());
  out << j.dump(2) << "\n";
}

namespace {

Assignment read_assignment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  auto j = nlohmann::json::parse(in);
  Assignment a;
  a.shared_pool = j.at("shared_pool").get<std::vector<std::string>>();
  for (const auto& s : j.at("sessions")) {
    LabelingSession session;
    session.labeler_id = s.at("labeler_id").get<std::string>();
    session.assigned_ids = s.at("assigned_ids").get<std::vector<std::string>>();
    a.sessions.push_back(std::move(session));
  }
  return a;
}

std::filesystem::path checked_log_path(const std::filesystem::path& data_dir) {
  if (!LabelService::is_initialized(data_dir)) {
    throw std::runtime_error("data directory is not initialized: " + data_dir.string());
  }
  return data_dir / kLogFile;
}

}  // namespace

LabelService::LabelService(const std::filesystem::path& data_dir)
    : reviews_(corpus::load_reviews(checked_log_path(data_dir).parent_path() / kReviewsFile,
                                    corpus::Format::Jsonl)),
      assignment_(read_assignment(data_dir / kAssignmentFile)),
      store_(data_dir / kLogFile, &warnings_) {
  for (std::size_t i = 0; i < reviews_.size(); ++i) review_index_.emplace(reviews_[i].id, i);
  for (const auto& s : assignment_.sessions) {
    for (const auto& id : s.assigned_ids) {
      if (!review_index_.contains(id)) {
        throw std::runtime_error("assignment references unknown review '" + id + "'");
      }
    }
  }
}

const LabelingSession& LabelService::session_ref(const std::string& labeler_id) const {
  const LabelingSession* s = assignment_.find(labeler_id);
  if (!s) throw UnknownLabeler("unknown labeler '" + labeler_id + "'");
  return *s;
}

Progress LabelService::progress_locked(const LabelingSession& s) const {
  Progress p;
  p.assigned = s.assigned_ids.size();
  for (const auto& id : s.assigned_ids) {
    if (store_.latest(id, s.labeler_id)) ++p.completed;
  }
  return p;
}

LabelingSession LabelService::session(const std::string& labeler_id) const {
  std::shared_lock lock(mutex_);
  LabelingSession s = session_ref(labeler_id);
  for (const auto& id : s.assigned_ids) {
    if (store_.latest(id, labeler_id)) s.completed_ids.insert(id);
  }
  return s;
}

NextReview LabelService::next_unlabeled(const std::string& labeler_id) const {
  std::shared_lock lock(mutex_);
  const auto& s = session_ref(labeler_id);
  NextReview next;
  next.progress = progress_locked(s);
  for (const auto& id : s.assigned_ids) {
    if (!store_.latest(id, labeler_id)) {
      next.review = reviews_[review_index_.at(id)];
      break;
    }
  }
  return next;
}

SubmitResult LabelService::submit_label(const std::string& review_id, const std::string& labeler_id,
                                        ReviewLabel label) {
  SubmitResult result;
  auto errors = validate_submission(label, &result.warnings);
  std::unique_lock lock(mutex_);
  const auto& s = session_ref(labeler_id);
  if (std::find(s.assigned_ids.begin(), s.assigned_ids.end(), review_id) == s.assigned_ids.end()) {
    throw NotAssigned("review '" + review_id + "' is not assigned to '" + labeler_id + "'");
  }
  if (!errors.empty()) throw InvalidLabel(std::move(errors));
  label.labeled_at.clear();
  store_.append(review_id, labeler_id, label);
  result.progress = progress_locked(s);
  return result;
}

void LabelService::resolve(const std::string& review_id, ReviewLabel label) {
  auto errors = validate_submission(label);
  std::unique_lock lock(mutex_);
  if (!review_index_.contains(review_id)) throw NotAssigned("unknown review '" + review_id + "'");
  if (!errors.empty()) throw InvalidLabel(std::move(errors));
  label.labeled_at.clear();
  store_.append(review_id, kAdminLabeler, label);
}

AgreementReport LabelService::agreement() const {
  std::shared_lock lock(mutex_);
  return agreement_report(store_, assignment_.shared_pool);
}

ExportResult LabelService::export_corpus() const {
  std::shared_lock lock(mutex_);
  return export_labels(store_, reviews_);
}

std::vector<std::string> LabelService::warnings() const {
  std::shared_lock lock(mutex_);
  return warnings_;
}

}  // namespace reviewranker::labelserve
