// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reviewranker/textprep.hpp"

namespace reviewranker::vectorizer {

/// Raw word counts over a vocabulary.
struct FeatureVector {
  std::vector<std::uint32_t> counts;

  std::size_t size() const noexcept { return counts.size(); }
  std::uint64_t total() const noexcept;
  std::vector<double> as_doubles() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Tokens that were not in the vocabulary.
struct OovTally {
  std::size_t tokens = 0;
  std::size_t reviews = 0;  // reviews with at least one OOV token

  OovTally& operator+=(const OovTally& other) {
    tokens += other.tokens;
    reviews += other.reviews;
    return *this;
  }
};

/// counts[i] = occurrences of vocabulary word i. Unknown tokens are skipped
/// and added to `oov` when given. Throws std::invalid_argument on an empty
/// vocabulary.
FeatureVector vectorize(std::span<const std::string> tokens, const textprep::Vocabulary& vocab,
                        OovTally* oov = nullptr);

/// Element-wise sum; both vectors must have the same length.
FeatureVector operator+(const FeatureVector& a, const FeatureVector& b);

}  // namespace reviewranker::vectorizer
