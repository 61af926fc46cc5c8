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

#ifndef ADSTRENGTH_TESTS_SUPPORT_H_
#define ADSTRENGTH_TESTS_SUPPORT_H_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "adstrength/corpus.h"

namespace testing {

adstrength::Ad MakeAd(const std::string& id, const std::string& advertiser,
                      const std::string& campaign, const std::string& adgroup,
                      const std::string& category, const std::string& title,
                      int64_t impressions = 100, int64_t clicks = 1,
                      const std::string& publisher = "pub1");

// Small JSON-over-HTTP stub on 127.0.0.1 with an ephemeral port.
class StubServer {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json&, int& status)>;

  StubServer(const std::string& path, Handler handler,
             std::chrono::milliseconds delay = std::chrono::milliseconds(0));
  ~StubServer();

  std::string url() const;
  int hits() const { return hits_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string path_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
};

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& content);

// Source-tree data directory (tests/data).
std::filesystem::path DataDir();

}  // namespace testing

#endif  // ADSTRENGTH_TESTS_SUPPORT_H_
