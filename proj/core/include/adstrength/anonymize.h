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

#ifndef ADSTRENGTH_ANONYMIZE_H_
#define ADSTRENGTH_ANONYMIZE_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adstrength {

inline constexpr std::string_view kDefaultPlaceholder = "[BRAND]";

class BlockList {
 public:
  // Entries are case-folded with whitespace runs collapsed. Throws on empty
  // entries and on entries that would match inside the placeholder itself
  // (such an entry could never be fully removed).
  explicit BlockList(std::vector<std::string> entries,
                     std::string placeholder = std::string(kDefaultPlaceholder));

  // One entry per line, UTF-8, '#' starts a comment line.
  static BlockList Load(const std::filesystem::path& path,
                        std::string placeholder = std::string(kDefaultPlaceholder));

  // Entries ordered longest first (ties lexicographic).
  const std::vector<std::string>& entries() const { return entries_; }
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::vector<std::string> entries_;
  std::string placeholder_;
};

// Replaces brand references with the placeholder:
//  * capitalized word spans directly followed by a trademark sign (U+2122,
//    U+00AE), sign included;
//  * URL- and domain-shaped tokens;
//  * block-list entries, case-insensitively at word boundaries, longest
//    match first, where a space in an entry matches any whitespace run.
// Existing placeholders are left untouched, and the passes repeat until the
// text is stable, so the function is idempotent.
std::string Anonymize(std::string_view text, const BlockList& blocklist);

// Byte offsets of every word-boundary occurrence of `entry` in `text`
// outside placeholder spans.
std::vector<size_t> FindBlockedOccurrences(std::string_view text, std::string_view entry,
                                           std::string_view placeholder);

}  // namespace adstrength

#endif  // ADSTRENGTH_ANONYMIZE_H_
