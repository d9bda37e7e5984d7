// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "json_codec.hpp"
#include "reviewranker/labelserve.hpp"

namespace reviewranker::labelserve {

namespace detail {

nlohmann::ordered_json label_to_json(const corpus::ReviewLabel& label) {
  nlohmann::ordered_json j;
  if (label.operation == corpus::OperationType::NotEnoughInformation) {
    j["operation"] = "NEI";
  } else {
    j["operation"] = static_cast<int>(label.operation);
  }
  j["add_understood"] = label.add_understood ? 1 : 0;
  j["remove_understood"] = label.remove_understood ? 1 : 0;
  j["add_snippet"] = label.add_snippet;
  j["remove_snippet"] = label.remove_snippet;
  j["labeler_id"] = label.labeler_id;
  j["labeled_at"] = label.labeled_at;
  return j;
}

namespace {

std::optional<bool> binary(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    auto i = v.get<long long>();
    if (i == 0 || i == 1) return i == 1;
  }
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "0" || s == "false") return false;
    if (s == "1" || s == "true") return true;
  }
  return std::nullopt;
}

std::string text_field(const nlohmann::json& j, const char* name, std::vector<FieldError>& errors) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) {
    errors.push_back({name, "must be a string"});
    return {};
  }
  return it->get<std::string>();
}

}  // namespace

corpus::ReviewLabel label_from_json(const nlohmann::json& j, std::vector<FieldError>& errors) {
  corpus::ReviewLabel label;
  if (!j.is_object()) {
    errors.push_back({"*", "expected a JSON object"});
    return label;
  }
  auto op = j.find("operation");
  if (op == j.end() || op->is_null()) {
    errors.push_back({"operation", "missing"});
  } else {
    std::string text = op->is_string() ? op->get<std::string>() : op->dump();
    if (auto parsed = corpus::parse_operation(text)) {
      label.operation = *parsed;
    } else {
      errors.push_back({"operation", "expected 0, 1, 2 or NEI"});
    }
  }
  auto read_binary = [&](const char* name, bool& out) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) {
      out = false;
      return;
    }
    if (auto b = binary(*it)) {
      out = *b;
    } else {
      errors.push_back({name, "expected 0 or 1"});
    }
  };
  read_binary("add_understood", label.add_understood);
  read_binary("remove_understood", label.remove_understood);
  label.add_snippet = text_field(j, "add_snippet", errors);
  label.remove_snippet = text_field(j, "remove_snippet", errors);
  label.labeler_id = text_field(j, "labeler_id", errors);
  label.labeled_at = text_field(j, "labeled_at", errors);
  return label;
}

nlohmann::ordered_json review_to_json(const corpus::Review& review) {
  nlohmann::ordered_json j;
  j["id"] = review.id;
  j["text"] = review.text;
  j["project"] = review.project;
  j["context_urls"] = review.context_urls;
  return j;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

LabelStore::LabelStore(std::filesystem::path path, std::vector<std::string>* warnings)
    : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    std::ofstream create(path_, std::ios::binary | std::ios::app);
    if (!create) throw std::runtime_error("cannot create label log: " + path_.string());
    return;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::vector<FieldError> errors;
      Submission s;
      s.sequence = j.at("seq").get<std::uint64_t>();
      s.review_id = j.at("review_id").get<std::string>();
      s.label = detail::label_from_json(j, errors);
      s.labeler_id = s.label.labeler_id;
      if (!errors.empty() || s.labeler_id.empty()) throw std::runtime_error("bad label fields");
      apply(s);
      next_sequence_ = std::max(next_sequence_, s.sequence + 1);
    } catch (const std::exception& err) {
      if (warnings) {
        warnings->push_back(path_.string() + ":" + std::to_string(line_no) +
                            ": skipped unreadable log entry (" + err.what() + ")");
      }
    }
  }
}

void LabelStore::apply(const Submission& s) {
  view_[{s.review_id, s.labeler_id}] = s.label;
  ++log_size_;
}

Submission LabelStore::append(const std::string& review_id, const std::string& labeler_id,
                              const corpus::ReviewLabel& label) {
  Submission s;
  s.sequence = next_sequence_;
  s.review_id = review_id;
  s.labeler_id = labeler_id;
  s.label = label;
  s.label.labeler_id = labeler_id;
  if (s.label.labeled_at.empty()) s.label.labeled_at = detail::utc_timestamp();

  nlohmann::ordered_json j;
  j["seq"] = s.sequence;
  j["review_id"] = review_id;
  const auto fields = detail::label_to_json(s.label);
  for (const auto& [k, v] : fields.items()) j[k] = v;
  const std::string line = j.dump() + "\n";

  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot open label log: " + std::string(std::strerror(errno)));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string msg = std::strerror(errno);
      ::close(fd);
      throw std::runtime_error("failed writing label log: " + msg);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);

  apply(s);
  ++next_sequence_;
  return s;
}

std::map<std::string, corpus::ReviewLabel> LabelStore::labels_for(const std::string& review_id) const {
  std::map<std::string, corpus::ReviewLabel> out;
  for (auto it = view_.lower_bound({review_id, std::string()});
       it != view_.end() && it->first.first == review_id; ++it) {
    out.emplace(it->first.second, it->second);
  }
  return out;
}

std::optional<corpus::ReviewLabel> LabelStore::latest(const std::string& review_id,
                                                      const std::string& labeler_id) const {
  auto it = view_.find({review_id, labeler_id});
  if (it == view_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> LabelStore::reviews_labeled_by(const std::string& labeler_id) const {
  std::set<std::string> out;
  for (const auto& [key, label] : view_) {
    if (key.second == labeler_id) out.insert(key.first);
  }
  return out;
}

}  // namespace reviewranker::labelserve
