// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include "reviewranker/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "reviewranker/corpus.hpp"
#include "reviewranker/kernels.hpp"
#include "reviewranker/labelserve.hpp"
#include "reviewranker/labelserve_http.hpp"
#include "reviewranker/ranker.hpp"
#include "reviewranker/textprep.hpp"

namespace reviewranker::cli {

namespace {

namespace fs = std::filesystem;

// Reads either a JSON object or key=value lines (INI/TOML subset).
class KeyValueOrJsonConfig : public CLI::ConfigBase {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream in(text);
      return CLI::ConfigBase::from_config(in);
    }
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw CLI::ConfigError("config file is not a valid JSON object");
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_null()) continue;
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

corpus::Format resolve_format(const std::string& flag, const fs::path& path) {
  if (flag.empty()) return corpus::format_for_path(path);
  auto f = corpus::parse_format(flag);
  if (!f) throw CommandError("unknown format '" + flag + "' (expected csv or jsonl)");
  return *f;
}

void check_writable_parent(const fs::path& path) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw CommandError("output directory does not exist: " + parent.string());
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CommandError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw CommandError("cannot write " + path.string());
}

textprep::SynonymMap load_synonyms(const std::string& path) {
  if (path.empty()) return textprep::SynonymMap::builtin();
  return textprep::SynonymMap::load(path);
}

corpus::LabeledCorpus load_labeled(const fs::path& path, const std::string& format,
                                   std::ostream& err) {
  std::vector<std::string> warnings;
  auto c = corpus::load_corpus(path, resolve_format(format, path), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  return c;
}

void print_issues(const corpus::CorpusError& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  for (std::size_t i = 0; i < e.issues().size() && i < 20; ++i) {
    const auto& issue = e.issues()[i];
    err << "  line " << issue.line << ", " << issue.field << ": " << issue.message << "\n";
  }
  if (e.issues().size() > 20) err << "  ... " << e.issues().size() - 20 << " more\n";
}

struct CommonOptions {
  std::string input;
  std::string format;
  std::string synonyms;
  bool dedup = false;
};

struct ScoreOptions {
  CommonOptions common;
  std::string output;
  std::string report;
  std::size_t k = 10;
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  bool stratify = false;
  nn::TrainConfig train;
};

int cmd_score(const ScoreOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path output = o.output;
  const fs::path report = o.report.empty() ? fs::path(output).replace_extension(".report.json")
                                           : fs::path(o.report);
  check_writable_parent(output);
  check_writable_parent(report);
  o.train.validate();

  auto data = load_labeled(o.common.input, o.common.format, err);
  if (o.common.dedup) {
    const std::size_t before = data.size();
    data = corpus::deduplicate(data);
    err << "dedup: " << before << " -> " << data.size() << " reviews\n";
  }

  ranker::PipelineOptions options;
  options.train = o.train;
  options.k = o.k;
  options.seed = o.seed;
  options.stratify = o.stratify;
  options.threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
  options.synonyms = load_synonyms(o.common.synonyms);
  options.log = [&err](const std::string& line) { err << line << "\n"; };

  auto result = ranker::run_pipeline(data, options);
  ranker::export_scores(result.records, output);
  write_text(report, ranker::run_report_json(result, options));

  out << "scored " << result.trainable << " reviews, excluded " << result.excluded
      << " (not enough information)\n";
  for (auto task : ranker::kTasks) {
    out << "mean validation accuracy " << ranker::task_name(task) << ": "
        << result.mean_accuracy[static_cast<std::size_t>(task)] << "\n";
  }
  out << "scores: " << output.string() << "\nreport: " << report.string() << "\n";
  return 0;
}

int cmd_stats(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  auto data = load_labeled(o.input, o.format, err);
  const auto deduped = corpus::deduplicate(data);
  const auto parts = corpus::partition_by_labelability(deduped);

  std::array<std::size_t, 3> ops{};
  std::array<std::size_t, 2> add{}, remove{};
  for (const auto& e : parts.trainable.entries) {
    ++ops[corpus::operation_class(e.label.operation)];
    ++add[e.label.add_understood ? 1 : 0];
    ++remove[e.label.remove_understood ? 1 : 0];
  }

  std::size_t vocabulary = 0;
  if (!deduped.empty()) {
    const auto synonyms = load_synonyms(o.synonyms);
    std::vector<textprep::TokenSequence> tokens;
    for (const auto& e : deduped.entries) {
      tokens.push_back(textprep::preprocess_review(e.review.text, synonyms));
    }
    vocabulary = textprep::build_vocabulary(tokens).size();
  }

  out << "reviews: " << data.size() << "\n";
  out << "after dedup: " << deduped.size() << "\n";
  out << "not enough information: " << parts.excluded.size() << "\n";
  out << "trainable: " << parts.trainable.size() << "\n";
  out << "operation: replace=" << ops[0] << " delete=" << ops[1] << " insert=" << ops[2] << "\n";
  out << "add_understood: 0=" << add[0] << " 1=" << add[1] << "\n";
  out << "remove_understood: 0=" << remove[0] << " 1=" << remove[1] << "\n";
  out << "vocabulary size: " << vocabulary << "\n";
  const auto lint = corpus::lint_labels(deduped);
  out << "lint warnings: " << lint.size() << "\n";
  for (const auto& w : lint) out << "  " << w.review_id << ": " << w.message << "\n";
  return 0;
}

struct ServeOptions {
  std::string data;
  std::string input;
  std::string format;
  std::vector<std::string> labelers;
  double shared_fraction = 0.1;
  std::uint64_t seed = 42;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

fs::path default_static_dir() {
#ifdef REVIEWRANKER_DEFAULT_WEB_DIR
  fs::path dir = REVIEWRANKER_DEFAULT_WEB_DIR;
  if (fs::exists(dir / "index.html")) return dir;
#endif
  return {};
}

int cmd_label_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  if (o.data.empty()) throw CommandError("--data is required (or set REVIEWRANKER_DATA)");
  const fs::path data_dir = o.data;
  if (!labelserve::LabelService::is_initialized(data_dir)) {
    if (o.input.empty()) {
      throw CommandError("data directory " + data_dir.string() +
                         " is not initialized; pass --input and --labelers to create it");
    }
    if (o.labelers.empty()) throw CommandError("--labelers is required to initialize " + o.data);
    auto reviews = corpus::load_reviews(o.input, resolve_format(o.format, o.input));
    labelserve::LabelService::initialize(data_dir, reviews, o.labelers, o.shared_fraction, o.seed);
    err << "initialized " << data_dir.string() << " with " << reviews.size() << " reviews for "
        << o.labelers.size() << " labelers\n";
  } else if (!o.input.empty()) {
    err << "warning: " << data_dir.string() << " is already initialized; ignoring --input\n";
  }

  labelserve::LabelService service(data_dir);
  for (const auto& w : service.warnings()) err << "warning: " << w << "\n";

  labelserve::ServerOptions server_options;
  server_options.host = o.host;
  server_options.port = o.port;
  server_options.static_dir = o.static_dir.empty() ? default_static_dir() : fs::path(o.static_dir);
  labelserve::LabelServer server(service, server_options);

  // Signals are handled by a dedicated thread so stop() runs outside a
  // signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server.bind();
  out << "listening on http://" << o.host << ":" << server.port() << "\n" << std::flush;

  std::atomic<bool> signalled{false};
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    server.stop();
  });
  server.serve();
  // serve() can also return on its own (e.g. a fatal socket error).
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  return 0;
}

struct ExportOptions {
  std::string data;
  std::string output;
  std::string format;
};

int cmd_export_labels(const ExportOptions& o, std::ostream& out, std::ostream& err) {
  if (o.data.empty()) throw CommandError("--data is required (or set REVIEWRANKER_DATA)");
  labelserve::LabelService service(o.data);
  for (const auto& w : service.warnings()) err << "warning: " << w << "\n";
  corpus::Format format = o.output.empty() ? resolve_format(o.format.empty() ? "csv" : o.format, {})
                                           : resolve_format(o.format, o.output);
  labelserve::ExportResult result;
  try {
    result = service.export_corpus();
  } catch (const labelserve::ExportBlocked& e) {
    err << "error: " << e.what() << "\n"
        << "resolve each tie with POST /api/reviews/{id}/resolve and export again\n";
    return 1;
  }
  for (const auto& id : result.majority_resolved) {
    err << "note: " << id << " resolved by majority vote\n";
  }
  const std::string content = corpus::serialize_corpus(result.corpus, format);
  if (o.output.empty()) {
    out << content;
  } else {
    check_writable_parent(o.output);
    write_text(o.output, content);
    err << "exported " << result.corpus.size() << " labeled reviews to " << o.output << "\n";
  }
  return 0;
}

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--input,-i", o.input, "Labeled corpus (CSV or JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--format", o.format, "Input format; defaults to the file extension")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  sub->add_option("--synonyms", o.synonyms, "Synonym dictionary, one group per line")
      ->check(CLI::ExistingFile);
}

void add_config(CLI::App* sub, std::string& path) {
  sub->add_option("--config", path,
                  "Config file (key=value lines or a JSON object); flags override it");
}

bool given_on_command_line(const CLI::Option* opt, const std::vector<std::string>& args) {
  for (const auto& a : args) {
    for (const auto& name : opt->get_lnames()) {
      const std::string flag = "--" + name;
      if (a == flag || a.starts_with(flag + "=")) return true;
    }
    for (const auto& name : opt->get_snames()) {
      if (a == "-" + name) return true;
    }
  }
  return false;
}

// Expands `--config FILE` into ordinary flags for the chosen subcommand.
// Values already given on the command line win.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_pos = 0;
  const CLI::App* sub = nullptr;
  for (; sub_pos < args.size(); ++sub_pos) {
    sub = app.get_subcommand_no_throw(args[sub_pos]);
    if (sub) break;
  }
  if (!sub) return args;

  std::string config_path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) return args;
  if (!fs::is_regular_file(config_path)) {
    throw CommandError("config file does not exist: " + config_path);
  }

  std::vector<CLI::ConfigItem> items;
  try {
    items = KeyValueOrJsonConfig().from_file(config_path);
  } catch (const CLI::Error& e) {
    throw CommandError("cannot read config file " + config_path + ": " + e.what());
  }

  std::vector<std::string> extra;
  for (const auto& item : items) {
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (!item.parents.empty() || key == "config") {
      throw CommandError("config file " + config_path + ": unsupported key '" + item.fullname() + "'");
    }
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) {
      throw CommandError("config file " + config_path + ": unknown option '" + item.name +
                         "' for " + sub->get_name());
    }
    if (given_on_command_line(opt, args)) continue;
    if (opt->get_expected_max() == 0) {
      if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "1")) {
        extra.push_back("--" + key);
      }
      continue;
    }
    extra.push_back("--" + key);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence scoring for code review comments", "reviewranker"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "reviewranker 1.0.0");
  std::string config_path;  // consumed by expand_config

  const char* env_data = std::getenv("REVIEWRANKER_DATA");
  const std::string default_data = env_data ? env_data : "";

  ScoreOptions score;
  std::string hidden_flag;
  auto* score_cmd = app.add_subcommand("score", "Train k-fold models and write confidence scores");
  add_common(score_cmd, score.common);
  score_cmd->add_option("--output,-o", score.output, "Scores CSV to write")->required();
  score_cmd->add_option("--report", score.report,
                        "JSON run report (default: <output>.report.json)");
  score_cmd->add_option("--k", score.k, "Number of folds")->check(CLI::Range(2, 1000000));
  score_cmd->add_option("--seed", score.seed, "Random seed");
  score_cmd->add_option("--epochs", score.train.epochs, "Training epochs per model");
  score_cmd->add_option("--hidden", score.train.hidden_sizes, "Hidden layer sizes, e.g. 64,32")
      ->delimiter(',');
  score_cmd->add_option("--dropout", score.train.dropout_rate, "Dropout rate between hidden layers")
      ->check(CLI::Range(0.0, 0.999999));
  score_cmd->add_option("--lr", score.train.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--batch-size", score.train.batch_size, "Mini-batch size")
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--threads", score.threads, "Folds trained concurrently (0 = all cores)");
  score_cmd->add_flag("--stratify", score.stratify, "Stratify folds by operation class");
  score_cmd->add_flag("--dedup", score.common.dedup, "Drop duplicate review texts first");
  add_config(score_cmd, config_path);

  CommonOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Print corpus statistics and label lint warnings");
  add_common(stats_cmd, stats);
  add_config(stats_cmd, config_path);

  ServeOptions serve;
  serve.data = default_data;
  auto* serve_cmd = app.add_subcommand("label-serve", "Run the labeling HTTP service");
  serve_cmd->add_option("--data", serve.data, "Data directory (default: $REVIEWRANKER_DATA)");
  serve_cmd->add_option("--input,-i", serve.input, "Reviews to load when initializing --data")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--format", serve.format, "Input format; defaults to the file extension")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  serve_cmd->add_option("--labelers", serve.labelers, "Labeler ids, comma separated")
      ->delimiter(',');
  serve_cmd->add_option("--shared-fraction", serve.shared_fraction,
                        "Fraction of reviews every labeler sees")
      ->check(CLI::Range(0.0, 0.999999));
  serve_cmd->add_option("--seed", serve.seed, "Seed for the review assignment");
  serve_cmd->add_option("--host", serve.host, "Address to bind");
  serve_cmd->add_option("--port", serve.port, "Port to listen on (0 picks a free port)")
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--static", serve.static_dir, "Frontend assets to serve at /")
      ->check(CLI::ExistingDirectory);
  add_config(serve_cmd, config_path);

  ExportOptions exp;
  exp.data = default_data;
  auto* export_cmd = app.add_subcommand("export-labels", "Write the labeled corpus from a data directory");
  export_cmd->add_option("--data", exp.data, "Data directory (default: $REVIEWRANKER_DATA)");
  export_cmd->add_option("--output,-o", exp.output, "Corpus file to write (default: stdout)");
  export_cmd->add_option("--format", exp.format, "Output format; defaults to the file extension")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  add_config(export_cmd, config_path);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(app, std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  // CLI11 consumes the vector from the back.
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*score_cmd) return cmd_score(score, out, err);
    if (*stats_cmd) return cmd_stats(stats, out, err);
    if (*serve_cmd) return cmd_label_serve(serve, out, err);
    if (*export_cmd) return cmd_export_labels(exp, out, err);
  } catch (const corpus::CorpusError& e) {
    print_issues(e, err);
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace reviewranker::cli
