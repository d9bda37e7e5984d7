// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include "reviewranker/textprep.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reviewranker::textprep {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Bytes >= 0x80 belong to UTF-8 sequences and are kept as word characters.
bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::string strip_non_word(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (is_word_byte(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

bool is_reserved_keyword(std::string_view token) noexcept {
  return token == kKeywordVariable || token == kKeywordDotH || token == kKeywordUnderscore ||
         token == kKeywordFunction;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string token(text.substr(i, j - i));
      token[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(token[0])));
      tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

std::string map_special_token(std::string_view token) {
  for (char c : token) {
    if (c >= 'A' && c <= 'Z') return std::string(kKeywordVariable);
  }
  if (token.find(".h") != std::string_view::npos || token.find('#') != std::string_view::npos) {
    return std::string(kKeywordDotH);
  }
  if (token.find('_') != std::string_view::npos) return std::string(kKeywordUnderscore);
  if (token.find_first_of("()") != std::string_view::npos) return std::string(kKeywordFunction);
  return std::string(token);
}

SynonymMap SynonymMap::from_groups(const std::vector<std::vector<std::string>>& groups,
                                   bool stem_keys) {
  SynonymMap out;
  auto& map = out.map_;
  for (const auto& raw_group : groups) {
    if (raw_group.empty()) continue;
    std::vector<std::string> group;
    for (const auto& w : raw_group) group.push_back(lower_ascii(w));

    // A group whose canonical word was claimed earlier joins that group, so
    // every target stays a fixed point.
    std::string target = stem_keys ? stem(group.front()) : group.front();
    if (auto it = map.find(group.front()); it != map.end()) target = it->second;
    if (auto it = map.find(target); it != map.end()) target = it->second;
    map.try_emplace(target, target);
    for (const auto& w : group) {
      map.try_emplace(w, target);
      if (stem_keys) map.try_emplace(stem(w), target);
    }
  }
  return out;
}

SynonymMap SynonymMap::parse(std::istream& in, bool stem_keys) {
  std::vector<std::vector<std::string>> groups;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::vector<std::string> group;
    std::string w;
    while (words >> w) group.push_back(w);
    if (!group.empty()) groups.push_back(std::move(group));
  }
  return from_groups(groups, stem_keys);
}

SynonymMap SynonymMap::load(const std::filesystem::path& path, bool stem_keys) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synonym dictionary: " + path.string());
  return parse(in, stem_keys);
}

SynonymMap SynonymMap::builtin() {
  return from_groups({{"minor", "little", "modest", "belittled"}});
}

const std::string* SynonymMap::find(std::string_view word) const {
  auto it = map_.find(std::string(word));
  return it == map_.end() ? nullptr : &it->second;
}

std::string collapse_synonyms(std::string_view token, const SynonymMap& map) {
  if (const auto* target = map.find(token)) return *target;
  return std::string(token);
}

TokenSequence preprocess_review(std::string_view text, const SynonymMap& map,
                                const PreprocessOptions& options) {
  TokenSequence out;
  for (const auto& token : tokenize(text)) {
    std::string mapped = map_special_token(token);
    if (mapped != token) {
      out.push_back(std::move(mapped));
      continue;
    }
    std::string word = strip_non_word(token);
    if (word.empty()) continue;
    if (options.stem) word = stem(word);
    if (options.collapse_synonyms) word = collapse_synonyms(word, map);
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

Vocabulary::Vocabulary(std::span<const std::string> ordered_words) {
  for (const auto& w : ordered_words) add(w);
}

std::size_t Vocabulary::add(const std::string& word) {
  auto [it, inserted] = index_.try_emplace(word, words_.size());
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const TokenSequence> corpus,
                            std::vector<std::string>* warnings) {
  Vocabulary vocab;
  for (const auto& seq : corpus) {
    for (const auto& tok : seq) vocab.add(tok);
  }
  if (vocab.empty() && warnings) warnings->push_back("vocabulary is empty");
  return vocab;
}

}  // namespace reviewranker::textprep
