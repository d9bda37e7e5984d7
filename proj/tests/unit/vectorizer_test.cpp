// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "reviewranker/random.hpp"
#include "reviewranker/vectorizer.hpp"

using namespace reviewranker;
using textprep::TokenSequence;
using vectorizer::FeatureVector;

namespace {

const char* kSample1 = "line over fifty characters you should reduce it to twenty characters";
const char* kSample2 = "provide line level comment to line";

std::vector<std::uint32_t> counts(std::initializer_list<std::uint32_t> v) { return v; }

}  // namespace

TEST_SUITE("vectorizer") {

TEST_CASE("feature vectors of the two sample reviews") {
  const auto map = textprep::SynonymMap::builtin();
  const textprep::PreprocessOptions words_only{.stem = false, .collapse_synonyms = false};
  std::vector<TokenSequence> docs = {textprep::preprocess_review(kSample1, map, words_only),
                                     textprep::preprocess_review(kSample2, map, words_only)};
  const auto vocab = textprep::build_vocabulary(docs);
  CHECK(vocab.words() == std::vector<std::string>{"line", "over", "fifty", "characters", "you",
                                                  "should", "reduce", "it", "to", "twenty",
                                                  "provide", "level", "comment"});
  CHECK(vectorizer::vectorize(docs[0], vocab).counts ==
        counts({1, 1, 1, 2, 1, 1, 1, 1, 1, 1, 0, 0, 0}));
  CHECK(vectorizer::vectorize(docs[1], vocab).counts ==
        counts({2, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1}));
}

TEST_CASE("stemming keeps the sample counts because the stems stay distinct") {
  const auto map = textprep::SynonymMap::builtin();
  std::vector<TokenSequence> docs = {textprep::preprocess_review(kSample1, map),
                                     textprep::preprocess_review(kSample2, map)};
  const auto vocab = textprep::build_vocabulary(docs);
  CHECK(vocab.size() == 13);
  CHECK(vectorizer::vectorize(docs[0], vocab).counts ==
        counts({1, 1, 1, 2, 1, 1, 1, 1, 1, 1, 0, 0, 0}));
  CHECK(vectorizer::vectorize(docs[1], vocab).counts ==
        counts({2, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1}));
}

TEST_CASE("empty token list gives a zero vector") {
  textprep::Vocabulary vocab(std::vector<std::string>{"a", "b", "c"});
  auto v = vectorizer::vectorize(TokenSequence{}, vocab);
  CHECK(v.counts == counts({0, 0, 0}));
  CHECK(v.total() == 0);
}

TEST_CASE("empty vocabulary is rejected") {
  CHECK_THROWS_AS(vectorizer::vectorize(TokenSequence{"a"}, textprep::Vocabulary{}),
                  std::invalid_argument);
}

TEST_CASE("out-of-vocabulary tokens are skipped and tallied") {
  textprep::Vocabulary vocab(std::vector<std::string>{"a", "b"});
  vectorizer::OovTally oov;
  auto v = vectorizer::vectorize(TokenSequence{"a", "zz", "b", "zz", "a"}, vocab, &oov);
  CHECK(v.counts == counts({2, 1}));
  CHECK(oov.tokens == 2);
  CHECK(oov.reviews == 1);
  vectorizer::vectorize(TokenSequence{"a"}, vocab, &oov);
  CHECK(oov.reviews == 1);
}

TEST_CASE("permutation, additivity and OOV invariance on random token lists") {
  const std::vector<std::string> words = {"w0", "w1", "w2", "w3", "w4", "w5", "w6"};
  textprep::Vocabulary vocab(std::span<const std::string>(words.data(), 5));
  Rng rng(31);
  auto random_tokens = [&](std::size_t n) {
    TokenSequence t;
    for (std::size_t i = 0; i < n; ++i) t.push_back(words[rng.below(words.size())]);
    return t;
  };
  for (int trial = 0; trial < 500; ++trial) {
    auto a = random_tokens(rng.below(20));
    auto b = random_tokens(rng.below(20));
    const auto va = vectorizer::vectorize(a, vocab);
    const auto vb = vectorizer::vectorize(b, vocab);

    auto shuffled = a;
    rng.shuffle(std::span<std::string>(shuffled));
    CHECK(vectorizer::vectorize(shuffled, vocab) == va);

    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    CHECK(vectorizer::vectorize(ab, vocab) == va + vb);

    auto noisy = a;
    noisy.push_back("unseen");
    noisy.insert(noisy.begin(), "w6");
    CHECK(vectorizer::vectorize(noisy, vocab) == va);

    const auto in_vocab = std::count_if(a.begin(), a.end(),
                                        [&](const std::string& t) { return vocab.contains(t); });
    CHECK(va.total() == static_cast<std::uint64_t>(in_vocab));
    CHECK(va.size() == vocab.size());
  }
}

TEST_CASE("as_doubles mirrors the counts") {
  FeatureVector v{{0, 3, 1}};
  CHECK(v.as_doubles() == std::vector<double>{0.0, 3.0, 1.0});
}

}
