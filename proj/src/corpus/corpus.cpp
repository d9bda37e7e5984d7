// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include "reviewranker/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "reviewranker/csv.hpp"

namespace reviewranker::corpus {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_urls(std::string_view s) {
  std::vector<std::string> urls;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) urls.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return urls;
}

std::string join_urls(const std::vector<std::string>& urls) {
  std::string out;
  for (const auto& u : urls) {
    if (!out.empty()) out.push_back(' ');
    out += u;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open input file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fields of one record before validation. Binary answers stay textual so
// that the CSV and JSONL readers share one validation path.
struct RawRecord {
  std::size_t line = 0;
  std::string id;
  std::string text;
  std::string operation;
  std::string add_understood;
  std::string remove_understood;
  std::string add_snippet;
  std::string remove_snippet;
  std::string project;
  std::string context_urls;
  std::vector<std::string> context_url_list;
  bool urls_as_list = false;
  std::string labeler_id;
  std::string labeled_at;
};

std::optional<bool> parse_binary(std::string_view s) {
  s = trim(s);
  if (s == "0" || s == "false") return false;
  if (s == "1" || s == "true") return true;
  return std::nullopt;
}

// Validates a raw record; appends issues and returns nullopt on failure.
std::optional<Entry> validate(const RawRecord& raw, std::vector<RecordIssue>& issues) {
  const std::size_t before = issues.size();
  auto issue = [&](std::string field, std::string msg) {
    issues.push_back({raw.line, std::move(field), std::move(msg)});
  };

  Entry e;
  e.review.id = std::string(trim(raw.id));
  if (e.review.id.empty()) issue("id", "empty id");
  e.review.text = raw.text;
  if (trim(raw.text).empty()) issue("text", "empty review text");
  e.review.project = raw.project;
  e.review.context_urls = raw.urls_as_list ? raw.context_url_list : split_urls(raw.context_urls);

  auto op = parse_operation(raw.operation);
  if (!op) {
    issue("operation", "expected 0, 1, 2 or NEI, got '" + raw.operation + "'");
  } else {
    e.label.operation = *op;
  }
  const bool nei = op && *op == OperationType::NotEnoughInformation;

  auto binary_field = [&](const std::string& value, const char* name, bool& out) {
    if (nei && trim(value).empty()) {
      out = false;
      return;
    }
    auto b = parse_binary(value);
    if (!b) {
      issue(name, "expected 0 or 1, got '" + value + "'");
    } else {
      out = *b;
    }
  };
  binary_field(raw.add_understood, "add_understood", e.label.add_understood);
  binary_field(raw.remove_understood, "remove_understood", e.label.remove_understood);

  e.label.add_snippet = raw.add_snippet;
  e.label.remove_snippet = raw.remove_snippet;
  e.label.labeler_id = raw.labeler_id;
  e.label.labeled_at = raw.labeled_at;

  if (issues.size() == before) {
    if (auto bad = check_label_invariants(e.label)) {
      issue(e.label.add_snippet.empty() ? "remove_snippet" : "add_snippet", *bad);
    }
  }
  if (issues.size() != before) return std::nullopt;
  return e;
}

const std::array<std::string_view, 5> kRequiredColumns = {
    "id", "text", "operation", "add_understood", "remove_understood"};

std::vector<RawRecord> read_csv(std::string_view content, std::vector<RecordIssue>& issues) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(content);
  } catch (const std::runtime_error& err) {
    throw CorpusError(std::string("malformed CSV: ") + err.what());
  }
  std::vector<RawRecord> records;
  if (rows.empty()) return records;

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    column.emplace(std::string(trim(rows[0].fields[i])), i);
  }
  std::vector<RecordIssue> header_issues;
  for (auto name : kRequiredColumns) {
    if (!column.contains(std::string(name))) {
      header_issues.push_back({rows[0].line, std::string(name), "missing column in header"});
    }
  }
  if (!header_issues.empty()) {
    throw CorpusError("CSV header is missing required columns", std::move(header_issues));
  }

  const std::size_t width = rows[0].fields.size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != width) {
      issues.push_back({row.line, "*",
                        "expected " + std::to_string(width) + " fields, got " +
                            std::to_string(row.fields.size())});
      continue;
    }
    auto get = [&](const char* name) -> std::string {
      auto it = column.find(name);
      return it == column.end() ? std::string() : row.fields[it->second];
    };
    RawRecord raw;
    raw.line = row.line;
    raw.id = get("id");
    raw.text = get("text");
    raw.operation = get("operation");
    raw.add_understood = get("add_understood");
    raw.remove_understood = get("remove_understood");
    raw.add_snippet = get("add_snippet");
    raw.remove_snippet = get("remove_snippet");
    raw.project = get("project");
    raw.context_urls = get("context_urls");
    raw.labeler_id = get("labeler_id");
    raw.labeled_at = get("labeled_at");
    records.push_back(std::move(raw));
  }
  return records;
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

std::vector<RawRecord> read_jsonl(std::string_view content, bool require_labels,
                                  std::vector<RecordIssue>& issues) {
  std::vector<RawRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (trim(line).empty()) {
      if (end == content.size()) break;
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      issues.push_back({line_no, "*", std::string("invalid JSON: ") + err.what()});
      continue;
    }
    if (!obj.is_object()) {
      issues.push_back({line_no, "*", "record is not a JSON object"});
      continue;
    }
    RawRecord raw;
    raw.line = line_no;
    bool ok = true;
    auto get = [&](const char* name, bool required) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end()) {
        if (required) {
          issues.push_back({line_no, name, "missing field"});
          ok = false;
        }
        return {};
      }
      return json_scalar_to_string(*it);
    };
    raw.id = get("id", true);
    raw.text = get("text", true);
    raw.operation = get("operation", require_labels);
    raw.add_understood = get("add_understood", false);
    raw.remove_understood = get("remove_understood", false);
    raw.add_snippet = get("add_snippet", false);
    raw.remove_snippet = get("remove_snippet", false);
    raw.project = get("project", false);
    raw.labeler_id = get("labeler_id", false);
    raw.labeled_at = get("labeled_at", false);
    if (auto it = obj.find("context_urls"); it != obj.end()) {
      if (it->is_array()) {
        raw.urls_as_list = true;
        for (const auto& u : *it) raw.context_url_list.push_back(json_scalar_to_string(u));
      } else {
        raw.context_urls = json_scalar_to_string(*it);
      }
    }
    if (ok) records.push_back(std::move(raw));
    if (end == content.size()) break;
  }
  return records;
}

[[noreturn]] void throw_issues(std::vector<RecordIssue> issues) {
  std::ostringstream msg;
  msg << issues.size() << " malformed record(s)";
  const std::size_t shown = std::min<std::size_t>(issues.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    msg << "\n  line " << issues[i].line << ", field '" << issues[i].field
        << "': " << issues[i].message;
  }
  if (issues.size() > shown) msg << "\n  ...";
  throw CorpusError(msg.str(), std::move(issues));
}

}  // namespace

std::size_t operation_class(OperationType op) {
  if (op == OperationType::NotEnoughInformation) {
    throw std::invalid_argument("NotEnoughInformation has no class index");
  }
  return static_cast<std::size_t>(op);
}

OperationType operation_from_class(std::size_t cls) {
  switch (cls) {
    case 0: return OperationType::Replace;
    case 1: return OperationType::Delete;
    case 2: return OperationType::Insert;
    default: throw std::out_of_range("operation class out of range: " + std::to_string(cls));
  }
}

std::optional<OperationType> parse_operation(std::string_view text) {
  std::string s = lower_ascii(trim(text));
  if (s == "0" || s == "replace") return OperationType::Replace;
  if (s == "1" || s == "delete" || s == "remove") return OperationType::Delete;
  if (s == "2" || s == "insert") return OperationType::Insert;
  if (s == "nei" || s == "not enough information") return OperationType::NotEnoughInformation;
  return std::nullopt;
}

std::string operation_code(OperationType op) {
  if (op == OperationType::NotEnoughInformation) return "NEI";
  return std::to_string(static_cast<int>(op));
}

std::string_view operation_name(OperationType op) {
  switch (op) {
    case OperationType::Replace: return "Replace";
    case OperationType::Delete: return "Delete";
    case OperationType::Insert: return "Insert";
    case OperationType::NotEnoughInformation: return "NotEnoughInformation";
  }
  return "?";
}

std::optional<std::string> check_label_invariants(const ReviewLabel& label) {
  if (!label.add_snippet.empty() && !label.add_understood) {
    return "add_snippet is set but add_understood is 0";
  }
  if (!label.remove_snippet.empty() && !label.remove_understood) {
    return "remove_snippet is set but remove_understood is 0";
  }
  return std::nullopt;
}

std::optional<Format> parse_format(std::string_view name) {
  std::string s = lower_ascii(trim(name));
  if (s == "csv") return Format::Csv;
  if (s == "jsonl" || s == "json") return Format::Jsonl;
  return std::nullopt;
}

Format format_for_path(const std::filesystem::path& path) {
  auto ext = lower_ascii(path.extension().string());
  return (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? Format::Jsonl : Format::Csv;
}

LabeledCorpus parse_corpus(std::string_view content, Format format,
                           std::vector<std::string>* warnings) {
  std::vector<RecordIssue> issues;
  auto raws = format == Format::Csv ? read_csv(content, issues)
                                    : read_jsonl(content, /*require_labels=*/true, issues);
  LabeledCorpus corpus;
  std::unordered_map<std::string, std::size_t> first_line;
  std::vector<RecordIssue> duplicates;
  for (const auto& raw : raws) {
    auto entry = validate(raw, issues);
    if (!entry) continue;
    auto [it, inserted] = first_line.emplace(entry->review.id, raw.line);
    if (!inserted) {
      duplicates.push_back({raw.line, "id",
                            "duplicate id '" + entry->review.id + "' (first seen on line " +
                                std::to_string(it->second) + ")"});
      continue;
    }
    corpus.entries.push_back(std::move(*entry));
  }
  if (!duplicates.empty()) {
    std::ostringstream msg;
    msg << "duplicate review id(s):";
    for (const auto& d : duplicates) msg << "\n  line " << d.line << ": " << d.message;
    throw CorpusError(msg.str(), std::move(duplicates));
  }
  if (!issues.empty()) throw_issues(std::move(issues));
  if (corpus.empty() && warnings) warnings->push_back("corpus is empty");
  return corpus;
}

LabeledCorpus load_corpus(const std::filesystem::path& path, Format format,
                          std::vector<std::string>* warnings) {
  if (!std::filesystem::exists(path)) {
    throw CorpusError("input file does not exist: " + path.string());
  }
  return parse_corpus(read_file(path), format, warnings);
}

std::string serialize_corpus(const LabeledCorpus& corpus, Format format) {
  std::string out;
  if (format == Format::Jsonl) {
    for (const auto& e : corpus.entries) {
      ordered_json j;
      j["id"] = e.review.id;
      j["text"] = e.review.text;
      if (e.label.operation == OperationType::NotEnoughInformation) {
        j["operation"] = "NEI";
      } else {
        j["operation"] = static_cast<int>(e.label.operation);
      }
      j["add_understood"] = e.label.add_understood ? 1 : 0;
      j["remove_understood"] = e.label.remove_understood ? 1 : 0;
      j["add_snippet"] = e.label.add_snippet;
      j["remove_snippet"] = e.label.remove_snippet;
      if (!e.review.project.empty()) j["project"] = e.review.project;
      if (!e.review.context_urls.empty()) j["context_urls"] = e.review.context_urls;
      if (!e.label.labeler_id.empty()) j["labeler_id"] = e.label.labeler_id;
      if (!e.label.labeled_at.empty()) j["labeled_at"] = e.label.labeled_at;
      out += j.dump();
      out.push_back('\n');
    }
    return out;
  }

  std::vector<std::string> header = {"id",          "text",          "operation",
                                     "add_understood", "remove_understood", "add_snippet",
                                     "remove_snippet"};
  auto any = [&](auto pred) { return std::any_of(corpus.entries.begin(), corpus.entries.end(), pred); };
  const bool has_project = any([](const Entry& e) { return !e.review.project.empty(); });
  const bool has_urls = any([](const Entry& e) { return !e.review.context_urls.empty(); });
  const bool has_labeler = any([](const Entry& e) { return !e.label.labeler_id.empty(); });
  const bool has_time = any([](const Entry& e) { return !e.label.labeled_at.empty(); });
  if (has_project) header.push_back("project");
  if (has_urls) header.push_back("context_urls");
  if (has_labeler) header.push_back("labeler_id");
  if (has_time) header.push_back("labeled_at");
  out += csv::format_row(header);
  for (const auto& e : corpus.entries) {
    std::vector<std::string> row = {e.review.id,
                                    e.review.text,
                                    operation_code(e.label.operation),
                                    e.label.add_understood ? "1" : "0",
                                    e.label.remove_understood ? "1" : "0",
                                    e.label.add_snippet,
                                    e.label.remove_snippet};
    if (has_project) row.push_back(e.review.project);
    if (has_urls) row.push_back(join_urls(e.review.context_urls));
    if (has_labeler) row.push_back(e.label.labeler_id);
    if (has_time) row.push_back(e.label.labeled_at);
    out += csv::format_row(row);
  }
  return out;
}

void write_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path,
                  Format format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot write corpus file: " + path.string());
  out << serialize_corpus(corpus, format);
  if (!out) throw CorpusError("failed writing corpus file: " + path.string());
}

std::vector<Review> load_reviews(const std::filesystem::path& path, Format format) {
  if (!std::filesystem::exists(path)) {
    throw CorpusError("input file does not exist: " + path.string());
  }
  const std::string content = read_file(path);
  std::vector<RecordIssue> issues;
  std::vector<RawRecord> raws;
  if (format == Format::Jsonl) {
    raws = read_jsonl(content, /*require_labels=*/false, issues);
  } else {
    std::vector<csv::Row> rows;
    try {
      rows = csv::parse(content);
    } catch (const std::runtime_error& err) {
      throw CorpusError(std::string("malformed CSV: ") + err.what());
    }
    if (!rows.empty()) {
      std::map<std::string, std::size_t> column;
      for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
        column.emplace(std::string(trim(rows[0].fields[i])), i);
      }
      if (!column.contains("id") || !column.contains("text")) {
        throw CorpusError("CSV header must contain 'id' and 'text'");
      }
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != rows[0].fields.size()) {
          issues.push_back({row.line, "*", "field count does not match header"});
          continue;
        }
        auto get = [&](const char* name) -> std::string {
          auto it = column.find(name);
          return it == column.end() ? std::string() : row.fields[it->second];
        };
        RawRecord raw;
        raw.line = row.line;
        raw.id = get("id");
        raw.text = get("text");
        raw.project = get("project");
        raw.context_urls = get("context_urls");
        raws.push_back(std::move(raw));
      }
    }
  }

  std::vector<Review> reviews;
  std::unordered_set<std::string> seen;
  for (const auto& raw : raws) {
    Review r;
    r.id = std::string(trim(raw.id));
    r.text = raw.text;
    r.project = raw.project;
    r.context_urls = raw.urls_as_list ? raw.context_url_list : split_urls(raw.context_urls);
    if (r.id.empty()) {
      issues.push_back({raw.line, "id", "empty id"});
      continue;
    }
    if (trim(r.text).empty()) {
      issues.push_back({raw.line, "text", "empty review text"});
      continue;
    }
    if (!seen.insert(r.id).second) {
      throw CorpusError("duplicate review id '" + r.id + "' on line " + std::to_string(raw.line));
    }
    reviews.push_back(std::move(r));
  }
  if (!issues.empty()) throw_issues(std::move(issues));
  return reviews;
}

std::string normalized_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : trim(text)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

LabeledCorpus deduplicate(const LabeledCorpus& corpus) {
  LabeledCorpus out;
  std::unordered_set<std::string> seen;
  for (const auto& e : corpus.entries) {
    if (seen.insert(normalized_text(e.review.text)).second) out.entries.push_back(e);
  }
  return out;
}

Partition partition_by_labelability(const LabeledCorpus& corpus) {
  Partition p;
  for (const auto& e : corpus.entries) {
    if (e.label.operation == OperationType::NotEnoughInformation) {
      p.excluded.entries.push_back(e);
    } else {
      p.trainable.entries.push_back(e);
    }
  }
  return p;
}

std::vector<LintWarning> lint_labels(const LabeledCorpus& corpus) {
  std::vector<LintWarning> warnings;
  for (const auto& e : corpus.entries) {
    bool want_add = false;
    bool want_remove = false;
    switch (e.label.operation) {
      case OperationType::Replace: want_add = want_remove = true; break;
      case OperationType::Insert: want_add = true; break;
      case OperationType::Delete: want_remove = true; break;
      case OperationType::NotEnoughInformation: continue;
    }
    if (e.label.add_understood != want_add || e.label.remove_understood != want_remove) {
      std::ostringstream msg;
      msg << operation_name(e.label.operation) << " usually has add=" << want_add
          << " remove=" << want_remove << ", got add=" << e.label.add_understood
          << " remove=" << e.label.remove_understood;
      warnings.push_back({e.review.id, msg.str()});
    }
  }
  return warnings;
}

}  // namespace reviewranker::corpus
