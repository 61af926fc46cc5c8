// Copyright 2026 The AdStrength Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADSTRENGTH_TEXTPROC_H_
#define ADSTRENGTH_TEXTPROC_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace adstrength {

// Ad text as fed to every model: title, description and call to action
// joined with ". ", empty fields skipped, whitespace collapsed.
struct AdText {
  std::string full_text;

  bool operator==(const AdText&) const = default;
};

AdText ComposeAdText(std::string_view title, std::string_view description,
                     std::string_view cta);

// Lowercased tokens split on every non-alphanumeric codepoint. CJK
// ideographs, kana and hangul syllables are emitted one codepoint per token.
std::vector<std::string> Tokenize(std::string_view text);

// UTF-8 helpers shared with the anonymizer.
namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at `pos`; advances `pos`. Malformed input
// yields kReplacement and consumes one byte.
char32_t Decode(std::string_view text, size_t& pos);
void Append(std::string& out, char32_t cp);
bool IsAlnum(char32_t cp);
bool IsUpper(char32_t cp);
bool IsSpace(char32_t cp);
bool IsSingleCharToken(char32_t cp);
char32_t ToLower(char32_t cp);
std::string Lower(std::string_view text);

}  // namespace utf8

enum class FeatureScheme { kCounts, kTfidf };

std::string_view FeatureSchemeName(FeatureScheme scheme);
FeatureScheme ParseFeatureScheme(std::string_view name);

// Sorted (index, value) pairs with strictly increasing indices and no zeros.
class SparseVec {
 public:
  using Entry = std::pair<uint32_t, double>;

  SparseVec() = default;
  // Sorts, merges duplicate indices by summation and drops zeros.
  static SparseVec FromUnsorted(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double Norm2() const;

  bool operator==(const SparseVec&) const = default;

 private:
  std::vector<Entry> entries_;
};

class Vocab {
 public:
  static constexpr uint32_t kDefaultMinDf = 2;

  // Each document contributes its token set once to document frequency.
  // Indices are assigned in first-occurrence order over the documents.
  static Vocab Build(std::span<const std::vector<std::string>> documents,
                     uint32_t min_df = kDefaultMinDf);

  size_t size() const { return tokens_.size(); }
  uint64_t total_docs() const { return total_docs_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<uint64_t>& doc_frequency() const { return df_; }

  // Returns -1 for out-of-vocabulary tokens.
  int64_t IndexOf(std::string_view token) const;
  double Idf(uint32_t index) const;
  // Digest of tokens, frequencies and total_docs; ties models to vocabs.
  std::string Hash() const;

  nlohmann::json ToJson() const;
  static Vocab FromJson(const nlohmann::json& doc);
  void Save(const std::filesystem::path& path) const;
  static Vocab Load(const std::filesystem::path& path);

  bool operator==(const Vocab& other) const {
    return tokens_ == other.tokens_ && df_ == other.df_ &&
           total_docs_ == other.total_docs_;
  }

 private:
  void Reindex();

  std::vector<std::string> tokens_;
  std::vector<uint64_t> df_;
  uint64_t total_docs_ = 0;
  std::unordered_map<std::string, uint32_t> index_;
};

SparseVec Featurize(std::string_view text, const Vocab& vocab,
                    FeatureScheme scheme);
SparseVec FeaturizeTokens(std::span<const std::string> tokens,
                          const Vocab& vocab, FeatureScheme scheme);

// Frozen 179-entry English stopword list (the NLTK snapshot).
const std::unordered_set<std::string>& EnglishStopwords();

}  // namespace adstrength

#endif  // ADSTRENGTH_TEXTPROC_H_
