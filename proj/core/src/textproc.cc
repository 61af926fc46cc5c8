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

#include "adstrength/textproc.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "adstrength/error.h"
#include "adstrength/random.h"

namespace adstrength {
namespace utf8 {

char32_t Decode(std::string_view text, size_t& pos) {
  const auto byte = [&](size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra;
  char32_t cp;
  char32_t min_value;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min_value = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min_value = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min_value = 0x10000;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char next = byte(pos + i);
    if ((next & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (next & 0x3F);
  }
  if (cp < min_value || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += extra + 1;
  return cp;
}

void Append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

namespace {

bool InRange(char32_t cp, char32_t lo, char32_t hi) {
  return cp >= lo && cp <= hi;
}

}  // namespace

bool IsSingleCharToken(char32_t cp) {
  return (InRange(cp, 0x3041, 0x30FF) && cp != 0x30FB) ||
         InRange(cp, 0x3400, 0x4DBF) || InRange(cp, 0x4E00, 0x9FFF) ||
         InRange(cp, 0xF900, 0xFAFF) || InRange(cp, 0x20000, 0x2FFFF);
}

// Letter and digit blocks for the scripts ad text realistically uses. This
// is a table approximation of the Unicode L*/N* classes, not the full UCD.
bool IsAlnum(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
  if (InRange(cp, 0xC0, 0x2AF)) return cp != 0xD7 && cp != 0xF7;
  if (InRange(cp, 0x386, 0x3FF)) return cp != 0x387;
  if (InRange(cp, 0x400, 0x481) || InRange(cp, 0x48A, 0x52F)) return true;
  if (InRange(cp, 0x531, 0x556) || InRange(cp, 0x561, 0x587)) return true;
  if (InRange(cp, 0x5D0, 0x5EA)) return true;
  if (InRange(cp, 0x620, 0x64A) || InRange(cp, 0x660, 0x669)) return true;
  if (InRange(cp, 0x904, 0x939) || InRange(cp, 0x966, 0x96F)) return true;
  if (InRange(cp, 0xE01, 0xE30) || InRange(cp, 0xE50, 0xE59)) return true;
  if (InRange(cp, 0x1E00, 0x1FBC)) return true;
  if (IsSingleCharToken(cp)) return true;
  if (InRange(cp, 0xAC00, 0xD7A3)) return true;
  if (InRange(cp, 0xFF10, 0xFF19) || InRange(cp, 0xFF21, 0xFF3A) ||
      InRange(cp, 0xFF41, 0xFF5A)) {
    return true;
  }
  return false;
}

bool IsUpper(char32_t cp) { return IsAlnum(cp) && ToLower(cp) != cp; }

bool IsSpace(char32_t cp) {
  return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || InRange(cp, 0x2000, 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

char32_t ToLower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (InRange(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 32;
  if (cp == 0x130) return 'i';
  if (InRange(cp, 0x100, 0x137) || InRange(cp, 0x14A, 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (InRange(cp, 0x139, 0x148) || InRange(cp, 0x179, 0x17E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  if (cp == 0x386) return 0x3AC;
  if (InRange(cp, 0x388, 0x38A)) return cp + 37;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 63;
  if (InRange(cp, 0x391, 0x3AB) && cp != 0x3A2) return cp + 32;
  if (InRange(cp, 0x400, 0x40F)) return cp + 80;
  if (InRange(cp, 0x410, 0x42F)) return cp + 32;
  if (InRange(cp, 0x460, 0x481) || InRange(cp, 0x48A, 0x4BF) ||
      InRange(cp, 0x4D0, 0x52F)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (InRange(cp, 0x531, 0x556)) return cp + 48;
  if (InRange(cp, 0xFF21, 0xFF3A)) return cp + 32;
  return cp;
}

std::string Lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) Append(out, ToLower(Decode(text, pos)));
  return out;
}

}  // namespace utf8

namespace {

// Trims and collapses every whitespace run to one ASCII space.
std::string CollapseWhitespace(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  bool pending_space = false;
  size_t pos = 0;
  while (pos < field.size()) {
    const size_t start = pos;
    const char32_t cp = utf8::Decode(field, pos);
    if (utf8::IsSpace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(field.substr(start, pos - start));
  }
  return out;
}

}  // namespace

AdText ComposeAdText(std::string_view title, std::string_view description,
                     std::string_view cta) {
  AdText text;
  for (std::string_view field : {title, description, cta}) {
    std::string part = CollapseWhitespace(field);
    if (part.empty()) continue;
    if (!text.full_text.empty()) text.full_text += ". ";
    text.full_text += part;
  }
  return text;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::Decode(text, pos);
    if (!utf8::IsAlnum(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (utf8::IsSingleCharToken(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      std::string single;
      utf8::Append(single, cp);
      tokens.push_back(std::move(single));
      continue;
    }
    utf8::Append(current, utf8::ToLower(cp));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string_view FeatureSchemeName(FeatureScheme scheme) {
  return scheme == FeatureScheme::kCounts ? "counts" : "tfidf";
}

FeatureScheme ParseFeatureScheme(std::string_view name) {
  if (name == "counts") return FeatureScheme::kCounts;
  if (name == "tfidf") return FeatureScheme::kTfidf;
  Fail(ErrorKind::kInvalidArgument,
       "unknown feature scheme '" + std::string(name) + "'");
}

SparseVec SparseVec::FromUnsorted(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVec vec;
  for (const auto& [index, value] : entries) {
    if (!vec.entries_.empty() && vec.entries_.back().first == index) {
      vec.entries_.back().second += value;
    } else {
      vec.entries_.emplace_back(index, value);
    }
  }
  std::erase_if(vec.entries_, [](const Entry& e) { return e.second == 0.0; });
  return vec;
}

double SparseVec::Norm2() const {
  double sum = 0.0;
  for (const auto& [index, value] : entries_) sum += value * value;
  return std::sqrt(sum);
}

Vocab Vocab::Build(std::span<const std::vector<std::string>> documents,
                   uint32_t min_df) {
  std::vector<std::string> order;
  std::unordered_map<std::string, uint64_t> df;
  for (const auto& doc : documents) {
    std::unordered_set<std::string_view> seen;
    for (const auto& token : doc) {
      if (!seen.insert(token).second) continue;
      auto [it, inserted] = df.try_emplace(token, 0);
      if (inserted) order.push_back(token);
      ++it->second;
    }
  }
  Vocab vocab;
  vocab.total_docs_ = documents.size();
  for (auto& token : order) {
    const uint64_t count = df.at(token);
    if (count < min_df) continue;
    vocab.tokens_.push_back(std::move(token));
    vocab.df_.push_back(count);
  }
  vocab.Reindex();
  return vocab;
}

void Vocab::Reindex() {
  index_.clear();
  index_.reserve(tokens_.size());
  for (uint32_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

int64_t Vocab::IndexOf(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

double Vocab::Idf(uint32_t index) const {
  return std::log((1.0 + static_cast<double>(total_docs_)) /
                  (1.0 + static_cast<double>(df_[index]))) +
         1.0;
}

std::string Vocab::Hash() const {
  uint64_t hash = Fnv1a64(std::to_string(total_docs_));
  for (size_t i = 0; i < tokens_.size(); ++i) {
    hash = Fnv1a64(tokens_[i], hash);
    hash = Fnv1a64("\x1f" + std::to_string(df_[i]) + "\x1e", hash);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

nlohmann::json Vocab::ToJson() const {
  nlohmann::json index = nlohmann::json::object();
  for (uint32_t i = 0; i < tokens_.size(); ++i) index[tokens_[i]] = i;
  return {{"total_docs", total_docs_}, {"index", index}, {"df", df_}};
}

Vocab Vocab::FromJson(const nlohmann::json& doc) {
  try {
    Vocab vocab;
    vocab.total_docs_ = doc.at("total_docs").get<uint64_t>();
    vocab.df_ = doc.at("df").get<std::vector<uint64_t>>();
    const auto& index = doc.at("index");
    vocab.tokens_.assign(vocab.df_.size(), std::string());
    std::vector<bool> filled(vocab.df_.size(), false);
    for (auto it = index.begin(); it != index.end(); ++it) {
      const auto i = it.value().get<uint64_t>();
      if (i >= vocab.tokens_.size() || filled[i]) {
        Fail(ErrorKind::kParse, "vocab index is not dense at '" + it.key() + "'");
      }
      vocab.tokens_[i] = it.key();
      filled[i] = true;
    }
    if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
      Fail(ErrorKind::kParse, "vocab index has gaps");
    }
    vocab.Reindex();
    return vocab;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("malformed vocab: ") + e.what());
  }
}

void Vocab::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << ToJson().dump() << '\n';
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return FromJson(doc);
}

SparseVec FeaturizeTokens(std::span<const std::string> tokens,
                          const Vocab& vocab, FeatureScheme scheme) {
  std::map<uint32_t, double> counts;
  for (const auto& token : tokens) {
    const int64_t index = vocab.IndexOf(token);
    if (index >= 0) counts[static_cast<uint32_t>(index)] += 1.0;
  }
  std::vector<SparseVec::Entry> entries(counts.begin(), counts.end());
  if (scheme == FeatureScheme::kTfidf) {
    double norm = 0.0;
    for (auto& [index, value] : entries) {
      value *= vocab.Idf(index);
      norm += value * value;
    }
    norm = std::sqrt(norm);
    for (auto& entry : entries) entry.second /= norm;
  }
  return SparseVec::FromUnsorted(std::move(entries));
}

SparseVec Featurize(std::string_view text, const Vocab& vocab,
                    FeatureScheme scheme) {
  const auto tokens = Tokenize(text);
  return FeaturizeTokens(tokens, vocab, scheme);
}

}  // namespace adstrength
