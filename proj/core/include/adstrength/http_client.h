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

#ifndef ADSTRENGTH_HTTP_CLIENT_H_
#define ADSTRENGTH_HTTP_CLIENT_H_

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "adstrength/ctrmodel.h"
#include "json.hpp"

namespace httplib {
class Client;
}

namespace adstrength {

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

ParsedUrl ParseUrl(const std::string& url);

// JSON POST client over a small pool of keep-alive connections. Safe for
// concurrent use. Failures are raised as kNetwork, kTimeout (the call
// exceeded the configured budget) or kMalformedResponse.
class JsonHttpClient {
 public:
  JsonHttpClient(const std::string& url, HttpClientOptions options);
  ~JsonHttpClient();

  nlohmann::json Post(const nlohmann::json& body) const;
  size_t requests_sent() const;

 private:
  std::unique_ptr<httplib::Client> Acquire() const;
  void Release(std::unique_ptr<httplib::Client> client) const;

  ParsedUrl url_;
  HttpClientOptions options_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<httplib::Client>> idle_;
  mutable size_t requests_sent_ = 0;
};

}  // namespace adstrength

#endif  // ADSTRENGTH_HTTP_CLIENT_H_
