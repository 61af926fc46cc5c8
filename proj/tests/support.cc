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

#include "support.h"

#include <fstream>
#include <random>
#include <sstream>

#include "httplib.h"

namespace testing {

adstrength::Ad MakeAd(const std::string& id, const std::string& advertiser,
                      const std::string& campaign, const std::string& adgroup,
                      const std::string& category, const std::string& title,
                      int64_t impressions, int64_t clicks, const std::string& publisher) {
  adstrength::Ad ad;
  ad.ad_id = id;
  ad.advertiser_id = advertiser;
  ad.campaign_id = campaign;
  ad.adgroup_id = adgroup;
  ad.category = category;
  ad.title = title;
  ad.description = "";
  ad.cta = "";
  ad.publisher = publisher;
  ad.impressions = impressions;
  ad.clicks = clicks;
  return ad;
}

struct StubServer::Impl {
  httplib::Server server;
};

StubServer::StubServer(const std::string& path, Handler handler,
                       std::chrono::milliseconds delay)
    : impl_(std::make_unique<Impl>()), path_(path) {
  impl_->server.Post(path, [this, handler, delay](const httplib::Request& req,
                                                  httplib::Response& res) {
    ++hits_;
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    int status = 200;
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (...) {
      res.status = 400;
      return;
    }
    const nlohmann::json out = handler(body, status);
    res.status = status;
    if (out.is_string()) {
      res.set_content(out.get<std::string>(), "application/json");
    } else {
      res.set_content(out.dump(), "application/json");
    }
  });
  port_ = impl_->server.bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
  impl_->server.stop();
  thread_.join();
}

std::string StubServer::url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + path_;
}

TempDir::TempDir() {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("adstrength-test-" + std::to_string(rd()) + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::filesystem::path DataDir() { return ADSTRENGTH_TEST_DATA_DIR; }

}  // namespace testing
