// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <json.hpp>
#include <set>

#include "reviewranker/ranker.hpp"
#include "test_support.hpp"

using namespace reviewranker;
using namespace reviewranker::ranker;
using corpus::OperationType;

namespace {

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("r" + std::to_string(i));
  return ids;
}

void check_partition(const FoldAssignment& folds, const std::vector<std::string>& ids,
                     std::size_t k) {
  REQUIRE(folds.k() == k);
  std::multiset<std::string> seen;
  std::size_t lo = SIZE_MAX, hi = 0;
  for (std::size_t f = 1; f <= k; ++f) {
    const auto& m = folds.members(f);
    lo = std::min(lo, m.size());
    hi = std::max(hi, m.size());
    for (const auto& id : m) {
      seen.insert(id);
      CHECK(folds.fold_of(id) == f);
    }
  }
  CHECK(seen == std::multiset<std::string>(ids.begin(), ids.end()));
  CHECK(hi - lo <= 1);
}

nn::TrainConfig quick_config() {
  nn::TrainConfig c;
  c.hidden_sizes = {16, 8};
  c.epochs = 30;
  c.batch_size = 8;
  c.learning_rate = 0.01;
  return c;
}

}  // namespace

TEST_SUITE("ranker") {

TEST_CASE("ground-truth confidence lookups") {
  CHECK(ground_truth_confidence({{0.973, 0.027}}, 0) == 0.973);
  // The printed distribution does not sum to one; the lookup ignores that.
  CHECK(ground_truth_confidence({{0.027, 0.983, 0.222}}, 1) == 0.983);
  CHECK(ground_truth_confidence({{0.5, 0.5}}, 1) == 0.5);
  CHECK_THROWS_AS(ground_truth_confidence({{0.5, 0.5}}, 2), std::out_of_range);
}

TEST_CASE("combine_confidence worked examples") {
  CHECK(std::abs(combine_confidence(0.973, 0.967, 0.983) - 0.974) <= 0.001);
  CHECK(std::abs(combine_confidence(0.999, 0.443, 0.888) - 0.732) <= 0.001);
  CHECK(combine_confidence(1, 1, 1) == 1.0);
  CHECK(combine_confidence(0, 0.5, 0.9) == 0.0);
  CHECK(combine_confidence(0.7, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(combine_confidence(1.1, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(combine_confidence(0.5, -0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(combine_confidence(0.5, 0.5, std::nan("")), std::invalid_argument);
}

TEST_CASE("combine_confidence properties") {
  Rng rng(61);
  for (int trial = 0; trial < 5000; ++trial) {
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    const double s = combine_confidence(a, b, c);
    // Oracle: exp of the mean log.
    if (a > 0 && b > 0 && c > 0) {
      CHECK(s == doctest::Approx(std::exp((std::log(a) + std::log(b) + std::log(c)) / 3.0))
                     .epsilon(1e-12));
    }
    CHECK(s >= std::min({a, b, c}));
    CHECK(s <= std::max({a, b, c}));
    CHECK(s == doctest::Approx(combine_confidence(c, a, b)).epsilon(1e-15));
    CHECK(s == doctest::Approx(combine_confidence(b, c, a)).epsilon(1e-15));
    const double bump = std::min(1.0, a + rng.uniform() * 0.1);
    CHECK(combine_confidence(bump, b, c) >= s);
    CHECK(combine_confidence(a, a, a) == doctest::Approx(a).epsilon(1e-15));
    CHECK(combine_confidence(a, a, a) >= a - 1e-15);
  }
}

TEST_CASE("task labels") {
  corpus::ReviewLabel l;
  l.operation = OperationType::Insert;
  l.add_understood = true;
  CHECK(task_label(TaskKind::AddCode, l) == 1);
  CHECK(task_label(TaskKind::RemoveCode, l) == 0);
  CHECK(task_label(TaskKind::Operation, l) == 2);
  CHECK(num_classes(TaskKind::Operation) == 3);
  CHECK(num_classes(TaskKind::AddCode) == 2);
  l.operation = OperationType::NotEnoughInformation;
  l.add_understood = false;
  CHECK_THROWS(task_label(TaskKind::Operation, l));
}

TEST_CASE("fold examples") {
  auto ids = make_ids(100);
  auto folds = make_folds(ids, 10, 1);
  check_partition(folds, ids, 10);
  for (std::size_t f = 1; f <= 10; ++f) CHECK(folds.members(f).size() == 10);

  auto ids13 = make_ids(13);
  auto f13 = make_folds(ids13, 10, 1);
  std::vector<std::size_t> sizes;
  for (std::size_t f = 1; f <= 10; ++f) sizes.push_back(f13.members(f).size());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 1, 1, 1, 1, 1, 1, 1});

  CHECK(make_folds(ids, 10, 5) == make_folds(ids, 10, 5));
  CHECK_FALSE(make_folds(ids, 10, 5) == make_folds(ids, 10, 6));
}

TEST_CASE("fold errors") {
  auto ids = make_ids(5);
  CHECK_THROWS_AS(make_folds(ids, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_folds(ids, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_folds(ids, 10, 1).fold_of("r0"), std::invalid_argument);
}

TEST_CASE("unknown id and fold lookups throw") {
  auto ids = make_ids(20);
  auto folds = make_folds(ids, 4, 1);
  CHECK_THROWS_AS(folds.fold_of("nope"), std::out_of_range);
  CHECK_THROWS_AS(folds.members(0), std::out_of_range);
  CHECK_THROWS_AS(folds.members(5), std::out_of_range);
}

TEST_CASE("fold partition property") {
  Rng rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(12);
    const std::size_t n = k + rng.below(300);
    auto ids = make_ids(n);
    const auto seed = rng.next();
    auto folds = make_folds(ids, k, seed);
    check_partition(folds, ids, k);
    CHECK(folds == make_folds(ids, k, seed));

    std::vector<std::size_t> strata;
    for (std::size_t i = 0; i < n; ++i) strata.push_back(rng.below(3));
    auto strat = make_stratified_folds(ids, strata, k, seed);
    check_partition(strat, ids, k);
    CHECK(strat == make_stratified_folds(ids, strata, k, seed));
  }
}

TEST_CASE("stratified folds balance each stratum") {
  auto ids = make_ids(90);
  std::vector<std::size_t> strata;
  for (std::size_t i = 0; i < 90; ++i) strata.push_back(i < 60 ? 0 : (i < 80 ? 1 : 2));
  auto folds = make_stratified_folds(ids, strata, 10, 3);
  for (std::size_t f = 1; f <= 10; ++f) {
    std::array<int, 3> counts{};
    for (const auto& id : folds.members(f)) ++counts[strata[std::stoul(id.substr(1))]];
    CHECK(counts[0] == 6);
    CHECK(counts[1] == 2);
    CHECK(counts[2] == 1);
  }
  std::vector<std::size_t> short_strata{0, 1};
  CHECK_THROWS(make_stratified_folds(ids, short_strata, 10, 3));
}

TEST_CASE("pipeline scores every trainable review exactly once") {
  auto corpus = testing::separable_corpus(20, 63, 3);
  PipelineOptions options;
  options.train = quick_config();
  options.k = 2;
  std::map<std::size_t, std::set<std::string>> trained_on;
  std::mutex mu;
  options.audit = [&](std::size_t fold, TaskKind, std::span<const std::string> ids) {
    std::lock_guard lock(mu);
    trained_on[fold].insert(ids.begin(), ids.end());
  };
  auto result = run_pipeline(corpus, options);
  REQUIRE(result.records.size() == 23);
  CHECK(result.trainable == 20);
  CHECK(result.excluded == 3);
  CHECK(result.folds.size() == 2);
  std::multiset<std::string> scored;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& rec = result.records[i];
    CHECK(rec.review_id == corpus.entries[i].review.id);
    CHECK(rec.score >= 0.0);
    CHECK(rec.score <= 1.0);
    if (corpus.entries[i].label.operation == OperationType::NotEnoughInformation) {
      CHECK(rec.excluded);
      CHECK(rec.score == 0.0);
      CHECK_FALSE(rec.c_add.has_value());
      CHECK_FALSE(rec.c_remove.has_value());
      CHECK_FALSE(rec.c_operation.has_value());
      for (const auto& [fold, ids] : trained_on) CHECK_FALSE(ids.contains(rec.review_id));
    } else {
      CHECK_FALSE(rec.excluded);
      REQUIRE(rec.c_add.has_value());
      REQUIRE(rec.c_remove.has_value());
      REQUIRE(rec.c_operation.has_value());
      CHECK(rec.score == combine_confidence(*rec.c_add, *rec.c_remove, *rec.c_operation));
      scored.insert(rec.review_id);
    }
  }
  CHECK(scored.size() == 20);
  CHECK(std::set<std::string>(scored.begin(), scored.end()).size() == 20);
  // Each review is held out of exactly one of the two training splits.
  for (const auto& id : scored) {
    CHECK(trained_on[1].contains(id) != trained_on[2].contains(id));
  }
  std::size_t validation = 0;
  for (const auto& f : result.folds) validation += f.validation_size;
  CHECK(validation == 20);
}

TEST_CASE("pipeline on a corpus of only NotEnoughInformation reviews trains nothing") {
  auto corpus = testing::separable_corpus(0, 64, 5);
  PipelineOptions options;
  bool audited = false;
  options.audit = [&](std::size_t, TaskKind, std::span<const std::string>) { audited = true; };
  auto result = run_pipeline(corpus, options);
  CHECK_FALSE(audited);
  CHECK(result.folds.empty());
  REQUIRE(result.records.size() == 5);
  for (const auto& rec : result.records) {
    CHECK(rec.excluded);
    CHECK(rec.score == 0.0);
  }
}

TEST_CASE("a training split without a class names the fold and model") {
  corpus::LabeledCorpus c;
  for (int i = 0; i < 10; ++i) {
    // Nobody ever understood what to remove.
    c.entries.push_back(testing::make_entry("r" + std::to_string(i), "word" + std::to_string(i),
                                            corpus::operation_from_class(i % 3), i % 2 == 0,
                                            false));
  }
  PipelineOptions options;
  options.train = quick_config();
  options.k = 2;
  try {
    run_pipeline(c, options);
    FAIL("expected PipelineError");
  } catch (const PipelineError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fold 1") != std::string::npos);
    CHECK(msg.find(std::string(task_name(TaskKind::RemoveCode))) != std::string::npos);
  }
}

TEST_CASE("pipeline results do not depend on the thread count") {
  auto corpus = testing::separable_corpus(30, 65);
  PipelineOptions options;
  options.train = quick_config();
  options.k = 3;
  options.threads = 1;
  auto serial = run_pipeline(corpus, options);
  options.threads = 3;
  auto parallel = run_pipeline(corpus, options);
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].score == parallel.records[i].score);
    CHECK(serial.records[i].c_operation == parallel.records[i].c_operation);
  }
  CHECK(serial.mean_accuracy == parallel.mean_accuracy);
}

TEST_CASE("too few trainable reviews for k is a pipeline error") {
  auto corpus = testing::separable_corpus(5, 66);
  PipelineOptions options;
  options.k = 10;
  CHECK_THROWS_AS(run_pipeline(corpus, options), PipelineError);
}

TEST_CASE("score export round-trips") {
  Rng rng(67);
  std::vector<ConfidenceRecord> records;
  for (int i = 0; i < 50; ++i) {
    ConfidenceRecord r;
    r.review_id = "id" + std::to_string(i);
    if (i % 7 == 0) {
      r.excluded = true;
    } else {
      r.c_add = rng.uniform();
      r.c_remove = rng.uniform();
      r.c_operation = rng.uniform();
      r.score = combine_confidence(*r.c_add, *r.c_remove, *r.c_operation);
    }
    records.push_back(r);
  }
  auto parsed = parse_scores(format_scores(records));
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed[i].review_id == records[i].review_id);
    CHECK(parsed[i].excluded == records[i].excluded);
    CHECK(std::abs(parsed[i].score - records[i].score) <= 1e-9);
    CHECK(parsed[i].c_add.has_value() == records[i].c_add.has_value());
    if (records[i].c_add) {
      CHECK(std::abs(*parsed[i].c_add - *records[i].c_add) <= 1e-9);
      CHECK(std::abs(*parsed[i].c_remove - *records[i].c_remove) <= 1e-9);
      CHECK(std::abs(*parsed[i].c_operation - *records[i].c_operation) <= 1e-9);
    }
  }
}

TEST_CASE("score file layout") {
  std::vector<ConfidenceRecord> records(3);
  records[0].review_id = "line80";
  records[0].c_add = 0.973;
  records[0].c_remove = 0.967;
  records[0].c_operation = 0.983;
  records[0].score = combine_confidence(0.973, 0.967, 0.983);
  records[1].review_id = "b";
  records[1].excluded = true;
  records[2].review_id = "c";
  records[2].c_add = records[2].c_remove = records[2].c_operation = 0.5;
  records[2].score = 0.5;

  testing::TempDir dir;
  export_scores(records, dir / "scores.csv");
  const auto text = testing::read_file(dir / "scores.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.rfind("review_id,c_add,c_remove,c_operation,score,excluded\n", 0) == 0);
  CHECK(text.find("\nb,,,,0,1\n") != std::string::npos);
  auto parsed = parse_scores(text);
  CHECK(std::abs(parsed[0].score - 0.974) <= 0.001);
  CHECK_THROWS(export_scores(records, dir / "missing" / "scores.csv"));
}

TEST_CASE("run report is JSON with the expected fields") {
  auto corpus = testing::separable_corpus(12, 68, 1);
  PipelineOptions options;
  options.train = quick_config();
  options.k = 3;
  options.seed = 17;
  auto result = run_pipeline(corpus, options);
  auto report = nlohmann::json::parse(run_report_json(result, options));
  CHECK(report["seed"] == 17);
  CHECK(report["folds"].size() == 3);
  CHECK(report["vocabulary_size"] == result.vocabulary_size);
  CHECK(report.contains("oov"));
  CHECK(report.contains("config"));
  CHECK(report.contains("mean_validation_accuracy"));
  CHECK(report.contains("class_counts"));
}

}
