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

#include "adstrength/analytics.h"

#include <algorithm>
#include <fstream>

#include "adstrength/error.h"
#include "adstrength/textproc.h"

namespace adstrength {

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kCompose: return "compose";
    case EventKind::kTsiShown: return "tsi_shown";
    case EventKind::kEdit: return "edit";
    case EventKind::kSubmit: return "submit";
  }
  return "";
}

EventKind ParseEventKind(std::string_view name) {
  for (auto kind : {EventKind::kCompose, EventKind::kTsiShown, EventKind::kEdit,
                    EventKind::kSubmit}) {
    if (EventKindName(kind) == name) return kind;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown event kind '" + std::string(name) + "'");
}

bool UiEvent::IsWeakTsi() const {
  if (kind != EventKind::kTsiShown) return false;
  if (tsi) return *tsi == 0;
  return suggestions_shown && !suggestions_shown->empty();
}

void ValidateEvent(const UiEvent& event) {
  if (event.advertiser_id.empty()) Fail(ErrorKind::kInvalidArgument, "event lacks advertiser_id");
  if (event.timestamp < 0) Fail(ErrorKind::kInvalidArgument, "event timestamp is negative");
  if (event.kind == EventKind::kTsiShown && !event.suggestions_shown) {
    Fail(ErrorKind::kInvalidArgument, "tsi_shown event must carry suggestions_shown");
  }
  if (event.tsi && *event.tsi != 0 && *event.tsi != 1) {
    Fail(ErrorKind::kInvalidArgument, "tsi must be 0 or 1");
  }
}

nlohmann::json EventToJson(const UiEvent& event) {
  nlohmann::json doc = {{"advertiser_id", event.advertiser_id},
                        {"timestamp", event.timestamp},
                        {"kind", EventKindName(event.kind)}};
  if (event.text_before) doc["text_before"] = *event.text_before;
  if (event.text_after) doc["text_after"] = *event.text_after;
  if (event.suggestions_shown) doc["suggestions_shown"] = *event.suggestions_shown;
  if (event.tsi) doc["tsi"] = *event.tsi;
  return doc;
}

UiEvent EventFromJson(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) Fail(ErrorKind::kInvalidArgument, "event must be an object");
    UiEvent event;
    event.advertiser_id = doc.at("advertiser_id").get<std::string>();
    event.timestamp = doc.at("timestamp").get<int64_t>();
    event.kind = ParseEventKind(doc.at("kind").get<std::string>());
    if (doc.contains("text_before")) event.text_before = doc["text_before"].get<std::string>();
    if (doc.contains("text_after")) event.text_after = doc["text_after"].get<std::string>();
    if (doc.contains("suggestions_shown")) {
      event.suggestions_shown = doc["suggestions_shown"].get<std::vector<std::string>>();
    }
    if (doc.contains("tsi")) event.tsi = doc["tsi"].get<int>();
    ValidateEvent(event);
    return event;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInvalidArgument, std::string("malformed event: ") + e.what());
  }
}

std::vector<UiEvent> ReadEvents(std::istream& in) {
  std::vector<UiEvent> events;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(EventFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kParse, "line " + std::to_string(line_number) + ": " + e.what());
    } catch (const Error& e) {
      Fail(e.kind(), "line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return events;
}

std::vector<UiEvent> LoadEvents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  return ReadEvents(in);
}

std::vector<Session> Sessionize(std::vector<UiEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const UiEvent& a, const UiEvent& b) {
    if (a.advertiser_id != b.advertiser_id) return a.advertiser_id < b.advertiser_id;
    return a.timestamp < b.timestamp;
  });
  std::vector<Session> sessions;
  for (auto& event : events) {
    const bool extend = !sessions.empty() &&
                        sessions.back().advertiser_id == event.advertiser_id &&
                        event.timestamp - sessions.back().events.back().timestamp <=
                            kSessionGapSeconds;
    if (!extend) sessions.push_back({event.advertiser_id, {}});
    sessions.back().events.push_back(std::move(event));
  }
  return sessions;
}

namespace {

std::unordered_set<std::string> TokenSet(const std::string& text) {
  const auto tokens = Tokenize(text);
  return {tokens.begin(), tokens.end()};
}

}  // namespace

AdoptionReport DetectAdoption(const Session& session,
                              const std::unordered_set<std::string>& stopwords) {
  const auto& events = session.events;
  const bool any_shown = std::any_of(events.begin(), events.end(), [](const UiEvent& e) {
    return e.kind == EventKind::kTsiShown;
  });
  if (!any_shown) {
    Fail(ErrorKind::kFailedPrecondition, "session has no tsi_shown event");
  }
  AdoptionReport report;
  std::optional<std::string> latest_text;
  for (size_t i = 0; i < events.size(); ++i) {
    const UiEvent& shown = events[i];
    if (shown.kind != EventKind::kTsiShown) {
      if (shown.text_after) latest_text = shown.text_after;
      continue;
    }
    const std::string before = shown.text_before.value_or(latest_text.value_or(""));
    const auto baseline = TokenSet(before);
    std::vector<std::unordered_set<std::string>> suggestion_tokens;
    for (const auto& text : *shown.suggestions_shown) suggestion_tokens.push_back(TokenSet(text));
    for (size_t j = i + 1; j < events.size(); ++j) {
      const UiEvent& later = events[j];
      if ((later.kind != EventKind::kEdit && later.kind != EventKind::kSubmit) ||
          !later.text_after) {
        continue;
      }
      for (const auto& token : Tokenize(*later.text_after)) {
        if (stopwords.contains(token) || baseline.contains(token)) continue;
        for (size_t s = 0; s < suggestion_tokens.size(); ++s) {
          if (!suggestion_tokens[s].contains(token)) continue;
          report.tokens.insert(token);
          report.suggestions.insert({i, s});
        }
      }
    }
    if (shown.text_after) latest_text = shown.text_after;
  }
  report.adopted = !report.tokens.empty();
  return report;
}

nlohmann::json SessionReport::ToJson() const {
  nlohmann::json doc = {{"sessions", sessions},
                        {"recommended_sessions", recommended},
                        {"adopters", adopters},
                        {"rec_rate", rec_rate},
                        {"adoption_rate", adoption_rate}};
  if (rec_rate_undefined) doc["rec_rate_empty_denominator"] = true;
  if (adoption_rate_undefined) doc["adoption_rate_empty_denominator"] = true;
  return doc;
}

SessionReport ReportSessions(std::span<const Session> sessions,
                             const std::unordered_set<std::string>& stopwords) {
  SessionReport report;
  report.sessions = sessions.size();
  for (const auto& session : sessions) {
    const bool weak = std::any_of(session.events.begin(), session.events.end(),
                                  [](const UiEvent& e) { return e.IsWeakTsi(); });
    if (!weak) continue;
    ++report.recommended;
    if (DetectAdoption(session, stopwords).adopted) ++report.adopters;
  }
  report.rec_rate_undefined = report.sessions == 0;
  report.adoption_rate_undefined = report.recommended == 0;
  if (!report.rec_rate_undefined) {
    report.rec_rate = static_cast<double>(report.recommended) / static_cast<double>(report.sessions);
  }
  if (!report.adoption_rate_undefined) {
    report.adoption_rate =
        static_cast<double>(report.adopters) / static_cast<double>(report.recommended);
  }
  return report;
}

}  // namespace adstrength
