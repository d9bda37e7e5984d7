// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace reviewranker::textprep {

using TokenSequence = std::vector<std::string>;

inline constexpr std::string_view kKeywordVariable = "keywordvariable";
inline constexpr std::string_view kKeywordDotH = "keyworddoth";
inline constexpr std::string_view kKeywordUnderscore = "keywordunderscore";
inline constexpr std::string_view kKeywordFunction = "keywordfunction";

bool is_reserved_keyword(std::string_view token) noexcept;

/// Whitespace split; the first character of every token is lowercased and
/// everything else is kept verbatim so the special-word rules can see it.
TokenSequence tokenize(std::string_view text);

/// Replaces code-like tokens with a reserved keyword. Rules are tried in
/// order and the first hit wins:
///   1. any uppercase letter      -> keywordvariable
///   2. contains ".h" or '#'       -> keyworddoth
///   3. contains '_'               -> keywordunderscore
///   4. contains '(' or ')'        -> keywordfunction
/// Anything else is returned unchanged.
std::string map_special_token(std::string_view token);

/// Porter suffix stripper with one extension: a trailing double consonant
/// left by step 4 is undoubled (except ll/ss/zz), so "programmer" and
/// "programming" both reach "program". The stripper is re-applied until the
/// word stops changing, which makes stem() idempotent. Tokens that are not
/// purely lowercase ASCII letters are returned unchanged.
std::string stem(std::string_view token);

/// One round of the suffix stripper, without the fixed-point iteration.
std::string porter_step(std::string_view word);

/// word -> canonical word. Canonical words map to themselves.
class SynonymMap {
 public:
  SynonymMap() = default;

  /// Each group is a list of words, first one canonical. A word already
  /// claimed by an earlier group keeps its first mapping. When `stem_keys` is
  /// set, the stemmed form of every word is also mapped, and the canonical
  /// target is stemmed, so lookups work on pipeline output.
  static SynonymMap from_groups(const std::vector<std::vector<std::string>>& groups,
                                bool stem_keys = true);

  /// Plain text, one group per line, first word canonical. '#' starts a
  /// comment. Words are lowercased.
  static SynonymMap parse(std::istream& in, bool stem_keys = true);
  static SynonymMap load(const std::filesystem::path& path, bool stem_keys = true);

  /// Seeded with the single group "minor little modest belittled".
  static SynonymMap builtin();

  const std::string* find(std::string_view word) const;
  std::size_t size() const noexcept { return map_.size(); }
  bool empty() const noexcept { return map_.empty(); }
  const std::unordered_map<std::string, std::string>& entries() const noexcept { return map_; }

 private:
  std::unordered_map<std::string, std::string> map_;
};

std::string collapse_synonyms(std::string_view token, const SynonymMap& map);

struct PreprocessOptions {
  bool stem = true;
  bool collapse_synonyms = true;
};

/// tokenize -> special-word mapping -> (for untouched tokens) strip residual
/// punctuation, stem, collapse synonyms -> drop empties.
TokenSequence preprocess_review(std::string_view text, const SynonymMap& map,
                                const PreprocessOptions& options = {});

/// Token -> column index, in first-occurrence order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::span<const std::string> ordered_words);

  /// Adds `word` if missing; returns its index.
  std::size_t add(const std::string& word);
  std::optional<std::size_t> index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_of(word).has_value(); }
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Distinct tokens in first-occurrence order over the sequences as given.
/// An empty input yields an empty vocabulary and a warning.
Vocabulary build_vocabulary(std::span<const TokenSequence> corpus,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace reviewranker::textprep
