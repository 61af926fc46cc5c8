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

#ifndef ADSTRENGTH_ANALYTICS_H_
#define ADSTRENGTH_ANALYTICS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace adstrength {

inline constexpr int64_t kSessionGapSeconds = 1800;

enum class EventKind { kCompose, kTsiShown, kEdit, kSubmit };

std::string_view EventKindName(EventKind kind);
EventKind ParseEventKind(std::string_view name);

struct UiEvent {
  std::string advertiser_id;
  int64_t timestamp = 0;
  EventKind kind = EventKind::kCompose;
  std::optional<std::string> text_before;
  std::optional<std::string> text_after;
  std::optional<std::vector<std::string>> suggestions_shown;
  // Strength shown with a tsi_shown event; absent means "weak iff
  // suggestions were shown".
  std::optional<int> tsi;

  bool IsWeakTsi() const;
  bool operator==(const UiEvent&) const = default;
};

// Throws kInvalidArgument when an event violates its invariants.
void ValidateEvent(const UiEvent& event);
nlohmann::json EventToJson(const UiEvent& event);
UiEvent EventFromJson(const nlohmann::json& doc);
std::vector<UiEvent> ReadEvents(std::istream& in);
std::vector<UiEvent> LoadEvents(const std::filesystem::path& path);

struct Session {
  std::string advertiser_id;
  std::vector<UiEvent> events;
};

// Stable sort by (advertiser_id, timestamp); a new session starts when the
// gap to the previous event exceeds 1800 s.
std::vector<Session> Sessionize(std::vector<UiEvent> events);

struct AdoptionReport {
  bool adopted = false;
  std::set<std::string> tokens;
  // (index of the tsi_shown event in the session, suggestion index).
  std::set<std::pair<size_t, size_t>> suggestions;
};

// Adopted when an edit/submit after a tsi_shown contains a non-stopword
// token absent from the text before that tsi_shown and present in one of
// its suggestions. Requires at least one tsi_shown event.
AdoptionReport DetectAdoption(const Session& session,
                              const std::unordered_set<std::string>& stopwords);

struct SessionReport {
  size_t sessions = 0;
  size_t recommended = 0;  // sessions with a weak tsi_shown
  size_t adopters = 0;
  double rec_rate = 0.0;
  double adoption_rate = 0.0;
  bool rec_rate_undefined = false;
  bool adoption_rate_undefined = false;

  nlohmann::json ToJson() const;
};

SessionReport ReportSessions(std::span<const Session> sessions,
                             const std::unordered_set<std::string>& stopwords);

}  // namespace adstrength

#endif  // ADSTRENGTH_ANALYTICS_H_
