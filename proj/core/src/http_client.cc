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

#include "adstrength/http_client.h"

#include <chrono>

#include "adstrength/error.h"
#include "httplib.h"

namespace adstrength {

ParsedUrl ParseUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    Fail(ErrorKind::kInvalidArgument, "endpoint '" + url + "' has no scheme");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http") {
    Fail(ErrorKind::kInvalidArgument,
         "endpoint '" + url + "': only http:// is supported");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.origin = url.substr(0, path_start);
  parsed.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (parsed.origin.size() <= scheme_end + 3) {
    Fail(ErrorKind::kInvalidArgument, "endpoint '" + url + "' has no host");
  }
  return parsed;
}

JsonHttpClient::JsonHttpClient(const std::string& url, HttpClientOptions options)
    : url_(ParseUrl(url)), options_(options) {}

JsonHttpClient::~JsonHttpClient() = default;

std::unique_ptr<httplib::Client> JsonHttpClient::Acquire() const {
  {
    std::lock_guard lock(mu_);
    ++requests_sent_;
    if (!idle_.empty()) {
      auto client = std::move(idle_.back());
      idle_.pop_back();
      return client;
    }
  }
  auto client = std::make_unique<httplib::Client>(url_.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  client->set_keep_alive(true);
  return client;
}

void JsonHttpClient::Release(std::unique_ptr<httplib::Client> client) const {
  std::lock_guard lock(mu_);
  if (idle_.size() < options_.max_idle_connections) {
    idle_.push_back(std::move(client));
  }
}

size_t JsonHttpClient::requests_sent() const {
  std::lock_guard lock(mu_);
  return requests_sent_;
}

nlohmann::json JsonHttpClient::Post(const nlohmann::json& body) const {
  auto client = Acquire();
  const auto start = std::chrono::steady_clock::now();
  auto result = client->Post(url_.path, body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  if (!result) {
    const auto error = result.error();
    const bool timed_out = error == httplib::Error::ConnectionTimeout ||
                           (error == httplib::Error::Read &&
                            elapsed >= options_.timeout * 9 / 10);
    if (timed_out) {
      Fail(ErrorKind::kTimeout, "request to " + url_.origin + url_.path +
                                    " exceeded " +
                                    std::to_string(options_.timeout.count()) +
                                    " ms");
    }
    Fail(ErrorKind::kNetwork, "request to " + url_.origin + url_.path +
                                  " failed: " + httplib::to_string(error));
  }
  if (result->status != 200) {
    Release(std::move(client));
    Fail(ErrorKind::kNetwork, url_.origin + url_.path + " returned HTTP " +
                                  std::to_string(result->status));
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    Release(std::move(client));
    Fail(ErrorKind::kMalformedResponse,
         "response from " + url_.origin + url_.path + " is not JSON");
  }
  Release(std::move(client));
  return parsed;
}

}  // namespace adstrength
