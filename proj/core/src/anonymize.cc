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

#include "adstrength/anonymize.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <unordered_map>

#include "adstrength/error.h"
#include "adstrength/textproc.h"

namespace adstrength {
namespace {

using Codepoints = std::u32string;

constexpr char32_t kTrademark = 0x2122;
constexpr char32_t kRegistered = 0xAE;
constexpr size_t kMaxTrademarkWords = 4;

Codepoints Decode(std::string_view text) {
  Codepoints out;
  size_t pos = 0;
  while (pos < text.size()) out.push_back(utf8::Decode(text, pos));
  return out;
}

std::string Encode(const Codepoints& cps) {
  std::string out;
  for (char32_t cp : cps) utf8::Append(out, cp);
  return out;
}

Codepoints LowerAll(const Codepoints& cps) {
  Codepoints out(cps);
  for (char32_t& cp : out) cp = utf8::ToLower(cp);
  return out;
}

std::string NormalizeEntry(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char32_t cp : Decode(utf8::Lower(raw))) {
    if (utf8::IsSpace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    utf8::Append(out, cp);
  }
  return out;
}

// Marks every codepoint covered by an exact placeholder occurrence.
std::vector<bool> PlaceholderMask(const Codepoints& text, const Codepoints& placeholder) {
  std::vector<bool> mask(text.size(), false);
  if (placeholder.empty()) return mask;
  for (size_t pos = text.find(placeholder); pos != Codepoints::npos;
       pos = text.find(placeholder, pos + placeholder.size())) {
    std::fill(mask.begin() + pos, mask.begin() + pos + placeholder.size(), true);
  }
  return mask;
}

// Matches a normalized entry against lowered text at `start`. A space in the
// entry consumes a whitespace run. Word boundaries are required wherever the
// entry begins or ends with an alphanumeric codepoint.
std::optional<size_t> MatchAt(const Codepoints& lowered, size_t start,
                              const Codepoints& entry, const std::vector<bool>& mask) {
  if (entry.empty()) return std::nullopt;
  if (utf8::IsAlnum(entry.front()) && start > 0 && utf8::IsAlnum(lowered[start - 1])) {
    return std::nullopt;
  }
  size_t j = start;
  for (char32_t cp : entry) {
    if (cp == U' ') {
      if (j >= lowered.size() || !utf8::IsSpace(lowered[j])) return std::nullopt;
      while (j < lowered.size() && utf8::IsSpace(lowered[j])) ++j;
      continue;
    }
    if (j >= lowered.size() || lowered[j] != cp) return std::nullopt;
    ++j;
  }
  if (utf8::IsAlnum(entry.back()) && j < lowered.size() && utf8::IsAlnum(lowered[j])) {
    return std::nullopt;
  }
  for (size_t i = start; i < j; ++i) {
    if (mask[i]) return std::nullopt;
  }
  return j;
}

bool IsWordChar(char32_t cp) { return utf8::IsAlnum(cp); }

// The word directly before a trademark sign is a product name; when it is
// capitalized the span extends back over preceding capitalized words.
Codepoints MaskTrademarks(const Codepoints& text, const Codepoints& placeholder) {
  const auto mask = PlaceholderMask(text, placeholder);
  Codepoints out;
  size_t copied = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if ((text[i] != kTrademark && text[i] != kRegistered) || mask[i]) continue;
    std::vector<size_t> word_starts;
    size_t pos = i;
    while (pos > copied && utf8::IsSpace(text[pos - 1])) --pos;
    while (word_starts.size() < kMaxTrademarkWords) {
      size_t start = pos;
      while (start > copied && IsWordChar(text[start - 1]) && !mask[start - 1]) --start;
      if (start == pos) break;
      word_starts.push_back(start);
      size_t gap = start;
      while (gap > copied && utf8::IsSpace(text[gap - 1])) --gap;
      if (gap == start) break;
      pos = gap;
    }
    if (word_starts.empty()) continue;
    size_t span_start = word_starts.front();
    if (utf8::IsUpper(text[span_start])) {
      for (size_t w = 1; w < word_starts.size() && utf8::IsUpper(text[word_starts[w]]); ++w) {
        span_start = word_starts[w];
      }
    }
    out.append(text, copied, span_start - copied);
    out += placeholder;
    copied = i + 1;
  }
  out.append(text, copied, Codepoints::npos);
  return out;
}

bool IsAsciiAlpha(char32_t cp) { return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'); }

bool StartsWithIgnoreCase(const Codepoints& s, std::u32string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (utf8::ToLower(s[i]) != prefix[i]) return false;
  }
  return true;
}

bool LooksLikeDomain(const Codepoints& core) {
  Codepoints host = core.substr(0, core.find(U'/'));
  std::vector<Codepoints> labels;
  size_t start = 0;
  while (true) {
    const size_t dot = host.find(U'.', start);
    labels.push_back(host.substr(start, dot == Codepoints::npos ? Codepoints::npos : dot - start));
    if (dot == Codepoints::npos) break;
    start = dot + 1;
  }
  if (labels.size() < 2) return false;
  for (const auto& label : labels) {
    if (label.empty()) return false;
    for (char32_t cp : label) {
      if (!utf8::IsAlnum(cp) && cp != U'-') return false;
    }
  }
  const auto& tld = labels.back();
  if (tld.size() < 2 || tld.size() > 24) return false;
  return std::all_of(tld.begin(), tld.end(), IsAsciiAlpha);
}

bool IsUrlShaped(const Codepoints& core) {
  return StartsWithIgnoreCase(core, U"http://") || StartsWithIgnoreCase(core, U"https://") ||
         StartsWithIgnoreCase(core, U"www.") || LooksLikeDomain(core);
}

Codepoints MaskUrls(const Codepoints& text, const Codepoints& placeholder) {
  static constexpr std::u32string_view kLeading = U"(<\"'[";
  static constexpr std::u32string_view kTrailing = U".,;:!?)>\"']";
  Codepoints out;
  size_t i = 0;
  while (i < text.size()) {
    if (utf8::IsSpace(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    size_t end = i;
    while (end < text.size() && !utf8::IsSpace(text[end])) ++end;
    const Codepoints token = text.substr(i, end - i);
    size_t core_start = 0;
    size_t core_end = token.size();
    while (core_start < core_end && kLeading.find(token[core_start]) != std::u32string_view::npos) {
      ++core_start;
    }
    while (core_end > core_start && kTrailing.find(token[core_end - 1]) != std::u32string_view::npos) {
      --core_end;
    }
    const Codepoints core = token.substr(core_start, core_end - core_start);
    if (!core.empty() && core.find(placeholder) == Codepoints::npos && IsUrlShaped(core)) {
      out.append(token, 0, core_start);
      out += placeholder;
      out.append(token, core_end, Codepoints::npos);
    } else {
      out += token;
    }
    i = end;
  }
  return out;
}

Codepoints MaskBlockList(const Codepoints& text, const std::vector<Codepoints>& entries,
                         const Codepoints& placeholder) {
  const auto mask = PlaceholderMask(text, placeholder);
  const Codepoints lowered = LowerAll(text);
  std::unordered_map<char32_t, std::vector<const Codepoints*>> by_first;
  for (const auto& entry : entries) by_first[entry.front()].push_back(&entry);
  Codepoints out;
  size_t i = 0;
  while (i < text.size()) {
    auto it = mask[i] ? by_first.end() : by_first.find(lowered[i]);
    std::optional<size_t> match_end;
    if (it != by_first.end()) {
      for (const Codepoints* entry : it->second) {
        match_end = MatchAt(lowered, i, *entry, mask);
        if (match_end) break;
      }
    }
    if (match_end) {
      out += placeholder;
      i = *match_end;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

}  // namespace

BlockList::BlockList(std::vector<std::string> entries, std::string placeholder)
    : placeholder_(std::move(placeholder)) {
  if (placeholder_.empty()) Fail(ErrorKind::kInvalidArgument, "placeholder is empty");
  const Codepoints placeholder_lower = LowerAll(Decode(placeholder_));
  const std::vector<bool> no_mask(placeholder_lower.size(), false);
  for (const auto& raw : entries) {
    std::string entry = NormalizeEntry(raw);
    if (entry.empty()) Fail(ErrorKind::kInvalidArgument, "block list entry is empty");
    const Codepoints cps = Decode(entry);
    for (size_t i = 0; i < placeholder_lower.size(); ++i) {
      if (MatchAt(placeholder_lower, i, cps, no_mask)) {
        Fail(ErrorKind::kInvalidArgument,
             "block list entry '" + entry + "' matches inside the placeholder");
      }
    }
    entries_.push_back(std::move(entry));
  }
  std::sort(entries_.begin(), entries_.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

BlockList BlockList::Load(const std::filesystem::path& path, std::string placeholder) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    entries.push_back(line);
  }
  return BlockList(std::move(entries), std::move(placeholder));
}

std::string Anonymize(std::string_view text, const BlockList& blocklist) {
  const Codepoints placeholder = Decode(blocklist.placeholder());
  std::vector<Codepoints> entries;
  for (const auto& entry : blocklist.entries()) entries.push_back(Decode(entry));
  Codepoints current = Decode(text);
  for (int round = 0; round < 8; ++round) {
    Codepoints next = MaskTrademarks(current, placeholder);
    next = MaskUrls(next, placeholder);
    next = MaskBlockList(next, entries, placeholder);
    if (next == current) break;
    current = std::move(next);
  }
  return Encode(current);
}

std::vector<size_t> FindBlockedOccurrences(std::string_view text, std::string_view entry,
                                           std::string_view placeholder) {
  const Codepoints cps = Decode(text);
  const Codepoints lowered = LowerAll(cps);
  const Codepoints needle = Decode(NormalizeEntry(entry));
  const auto mask = PlaceholderMask(cps, Decode(placeholder));
  std::vector<size_t> offsets;
  size_t byte = 0;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (MatchAt(lowered, i, needle, mask)) offsets.push_back(byte);
    std::string encoded;
    utf8::Append(encoded, cps[i]);
    byte += encoded.size();
  }
  return offsets;
}

}  // namespace adstrength
