// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include "reviewranker/vectorizer.hpp"

#include <numeric>
#include <stdexcept>

namespace reviewranker::vectorizer {

std::uint64_t FeatureVector::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<double> FeatureVector::as_doubles() const {
  return std::vector<double>(counts.begin(), counts.end());
}

FeatureVector vectorize(std::span<const std::string> tokens, const textprep::Vocabulary& vocab,
                        OovTally* oov) {
  if (vocab.empty()) throw std::invalid_argument("vectorize: vocabulary is empty");
  FeatureVector v;
  v.counts.assign(vocab.size(), 0);
  std::size_t missing = 0;
  for (const auto& tok : tokens) {
    if (auto idx = vocab.index_of(tok)) {
      ++v.counts[*idx];
    } else {
      ++missing;
    }
  }
  if (oov && missing) {
    oov->tokens += missing;
    oov->reviews += 1;
  }
  return v;
}

FeatureVector operator+(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("FeatureVector size mismatch");
  FeatureVector out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out.counts[i] += b.counts[i];
  return out;
}

}  // namespace reviewranker::vectorizer
