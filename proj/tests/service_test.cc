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

#include <atomic>
#include <future>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "adstrength/error.h"
#include "adstrength/service.h"
#include "support.h"

using namespace adstrength;

namespace {

class SleepyPctr : public PctrProvider {
 public:
  explicit SleepyPctr(std::chrono::milliseconds delay) : delay_(delay) {}
  double Predict(const AdText&, std::string_view) const override {
    std::this_thread::sleep_for(delay_);
    return 0.1;
  }

 private:
  std::chrono::milliseconds delay_;
};

AdPool BeachPool(size_t n) {
  std::vector<Ad> ads;
  for (size_t i = 0; i < n; ++i) {
    ads.push_back(testing::MakeAd("b" + std::to_string(100 + i), "v" + std::to_string(i % 4),
                                  "c" + std::to_string(i % 4), "g" + std::to_string(i % 4),
                                  "travel", "Acme beach resort deal " + std::to_string(i)));
  }
  return AdPool::Create(ads, 13);
}

// A state whose every pctr is derived from `level`, so a response built from
// two different states would be detectable.
ServingState LevelState(const AdPool& pool, double level) {
  auto embedder = std::make_shared<HashedProjectionProvider>(32, 5);
  std::vector<std::string> ids;
  std::vector<float> flat;
  std::vector<double> pctrs;
  for (const auto& ad : pool.ads()) {
    ids.push_back(ad.ad_id);
    const auto v = embedder->Embed(ad.Text().full_text);
    flat.insert(flat.end(), v.begin(), v.end());
    pctrs.push_back(level * 2);
  }
  auto index = std::make_shared<AdIndex>(AdIndex::FromVectors(ids, flat, 32, pctrs));
  return MakeServingState(index, pool, std::make_shared<ConstantPctrProvider>(level), embedder,
                          BlockList({"acme"}));
}

ServiceOptions LooseOptions() {
  ServiceOptions o;
  o.tsi.min_sim = -1.0;
  o.pctr_budget = std::chrono::milliseconds(5000);
  o.retrieval_budget = std::chrono::milliseconds(5000);
  o.total_budget = std::chrono::milliseconds(5000);
  return o;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

const nlohmann::json kRequest = {{"title", "Beach resort"}, {"description", "deal"}};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("status mapping") {
  CHECK(HttpStatusFor(ErrorKind::kInvalidArgument) == 400);
  CHECK(HttpStatusFor(ErrorKind::kParse) == 400);
  CHECK(HttpStatusFor(ErrorKind::kNotFound) == 404);
  CHECK(HttpStatusFor(ErrorKind::kFailedPrecondition) == 409);
  CHECK(HttpStatusFor(ErrorKind::kUnavailable) == 503);
  CHECK(HttpStatusFor(ErrorKind::kTimeout) == 504);
  CHECK(HttpStatusFor(ErrorKind::kNetwork) == 502);
  CHECK(HttpStatusFor(ErrorKind::kIo) == 500);
}

TEST_CASE("not ready and invalid requests") {
  TsiService service(LooseOptions());
  CHECK(service.Health()["ready"] == false);
  CHECK(KindOf([&] { service.HandleTsi(kRequest); }) == ErrorKind::kUnavailable);
  CHECK(KindOf([&] { service.HandleTsi({{"title", "  "}}); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { service.HandleTsi(nlohmann::json::array()); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { service.HandleTsi({{"title", 5}}); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { service.Rebuild(); }) == ErrorKind::kFailedPrecondition);
}

TEST_CASE("responses match the library composition") {
  const AdPool pool = BeachPool(40);
  TsiService service(LooseOptions());
  service.Install(LevelState(pool, 0.01));
  const auto health = service.Health();
  CHECK(health["ready"] == true);
  CHECK(health["pool_size"] == 40);
  const auto state = service.Snapshot();
  CHECK(health["index_digest"] == state->index->Digest());

  const auto out = service.HandleTsi(kRequest);
  const AdText text = ComposeAdText("Beach resort", "deal", "");
  const auto neighbors = state->index->QueryApprox(state->embedder->Embed(text.full_text),
                                                   {service.options().tsi.k, -1.0, std::nullopt});
  const TsiResult expected = ScoreTsi(0.01, neighbors, service.options().tsi);
  CHECK(out["pctr"] == 0.01);
  CHECK(out["tsi"] == expected.tsi);
  CHECK(out["tsi"] == 0);
  CHECK(out["neighbors_considered"] == neighbors.size());
  REQUIRE(out["suggestions"].size() == expected.suggestions.size());
  for (size_t i = 0; i < expected.suggestions.size(); ++i) {
    const auto& s = out["suggestions"][i];
    CHECK(s["pctr"] == expected.suggestions[i].neighbor.pctr);
    CHECK(s["similarity"] == expected.suggestions[i].neighbor.similarity);
    const std::string anon = s["anonymized_text"];
    CHECK(anon.find("Acme") == std::string::npos);
    CHECK(anon.find("[BRAND]") != std::string::npos);
  }
  CHECK(out["latency_ms"].get<double>() >= 0.0);

  const auto similar = service.HandleSimilar({{"title", "Beach resort"}, {"description", "deal"}, {"k", 5}});
  REQUIRE(similar["neighbors"].size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(similar["neighbors"][i]["ad_id"] == neighbors[i].ad_id);
    CHECK(similar["neighbors"][i]["similarity"] == neighbors[i].similarity);
    if (i > 0) {
      CHECK(similar["neighbors"][i - 1]["similarity"].get<double>() >=
            similar["neighbors"][i]["similarity"].get<double>());
    }
  }
  CHECK(KindOf([&] { service.HandleSimilar({{"title", "x"}, {"k", 0}}); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { service.HandleSimilar({{"title", "x"}, {"min_sim", 3}}); }) ==
        ErrorKind::kInvalidArgument);

  const auto pctr = service.HandlePctr({{"title", "anything"}});
  CHECK(pctr["pctr"].get<double>() > 0.0);
  CHECK(pctr["pctr"].get<double>() < 1.0);
  CHECK(pctr["publisher"] == "OTHER");
}

TEST_CASE("provider timeout maps to 504") {
  const AdPool pool = BeachPool(10);
  ServiceOptions options = LooseOptions();
  options.pctr_budget = std::chrono::milliseconds(50);
  TsiService service(options);
  ServingState state = LevelState(pool, 0.01);
  state.pctr = std::make_shared<SleepyPctr>(std::chrono::milliseconds(400));
  service.Install(state);
  const auto start = std::chrono::steady_clock::now();
  CHECK(KindOf([&] { service.HandleTsi(kRequest); }) == ErrorKind::kTimeout);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::milliseconds(350));
  CHECK(KindOf([&] { service.HandlePctr(kRequest); }) == ErrorKind::kTimeout);
}

TEST_CASE("no torn reads while snapshots swap") {
  const AdPool pool = BeachPool(60);
  ServiceOptions options = LooseOptions();
  options.worker_threads = 8;
  TsiService service(options);
  const ServingState a = LevelState(pool, 0.01);
  const ServingState b = LevelState(pool, 0.04);
  service.Install(a);

  std::atomic<bool> done{false};
  std::atomic<int> failures{0};
  std::atomic<int> served{0};
  std::vector<std::thread> clients;
  for (int t = 0; t < 32; ++t) {
    clients.emplace_back([&] {
      while (!done.load()) {
        try {
          const auto out = service.HandleTsi(kRequest);
          const uint64_t gen = out["index_generation"];
          const double level = gen % 2 == 1 ? 0.01 : 0.04;
          bool ok = out["pctr"] == level && out["tsi"] == 0;
          for (const auto& s : out["suggestions"]) ok = ok && s["pctr"] == level * 2;
          if (!ok) ++failures;
          ++served;
        } catch (...) {
          ++failures;
        }
      }
    });
  }
  for (int i = 0; i < 60; ++i) {
    service.Install(i % 2 == 0 ? b : a);
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  done = true;
  for (auto& c : clients) c.join();
  CHECK(failures.load() == 0);
  CHECK(served.load() > 32);
  CHECK(service.Snapshot()->generation == 61);
}

TEST_CASE("rebuild failure keeps the old index") {
  const AdPool pool = BeachPool(20);
  std::atomic<int> calls{0};
  std::promise<void> release;
  std::shared_future<void> gate = release.get_future().share();
  TsiService service(LooseOptions(), [&] {
    const int n = ++calls;
    if (n == 2) gate.wait();
    if (n == 3) Fail(ErrorKind::kIo, "pool file vanished");
    return LevelState(pool, 0.01 * n);
  });
  CHECK(service.has_factory());
  service.Rebuild();
  const std::string digest = service.Health()["index_digest"];
  CHECK(service.Snapshot()->generation == 1);

  // Queries keep flowing while a rebuild is blocked mid-way.
  CHECK(service.StartRebuild());
  CHECK_FALSE(service.StartRebuild());
  for (int i = 0; i < 20; ++i) CHECK(service.HandleTsi(kRequest)["index_generation"] == 1);
  CHECK(service.Health()["rebuilding"] == true);
  release.set_value();
  service.WaitForRebuild();
  CHECK(service.Snapshot()->generation == 2);
  CHECK(service.HandleTsi(kRequest)["pctr"] == 0.02);

  CHECK(service.StartRebuild());
  service.WaitForRebuild();
  CHECK(service.Snapshot()->generation == 2);
  CHECK(service.HandleTsi(kRequest)["pctr"] == 0.02);
  const auto health = service.Health();
  CHECK(health["ready"] == true);
  CHECK(health["last_rebuild_error"].get<std::string>().find("vanished") != std::string::npos);
}

TEST_CASE("event ingestion") {
  testing::TempDir dir;
  ServiceOptions options = LooseOptions();
  options.events_log = dir / "events.jsonl";
  TsiService service(options);
  const nlohmann::json good = {{"advertiser_id", "a"}, {"timestamp", 5}, {"kind", "compose"},
                               {"text_after", "hello"}};
  CHECK(service.HandleEvents(good)["appended"] == 1);
  CHECK(service.HandleEvents(nlohmann::json::array({good, good}))["appended"] == 2);
  const nlohmann::json bad = {{"advertiser_id", "a"}, {"timestamp", -5}, {"kind", "compose"}};
  CHECK(KindOf([&] { service.HandleEvents(bad); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { service.HandleEvents(nlohmann::json::array({good, bad})); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { service.HandleEvents({{"kind", "compose"}}); }) == ErrorKind::kInvalidArgument);
  CHECK(service.events_appended() == 3);
  const auto events = LoadEvents(dir / "events.jsonl");
  CHECK(events.size() == 3);

  TsiService memory(LooseOptions());
  memory.HandleEvents(good);
  CHECK(memory.memory_log().size() == 1);
}

TEST_CASE("config parsing and environment overrides") {
  const ServeConfig defaults;
  CHECK(defaults.pctr_budget_ms == 200);
  CHECK(defaults.retrieval_budget_ms == 200);
  CHECK(defaults.total_budget_ms == 900);
  ServeConfig c = ServeConfig::FromJson({{"listen_port", 9000}, {"tsi_delta", 0.5},
                                         {"pool_path", "/tmp/pool.jsonl"}});
  CHECK(c.listen_port == 9000);
  CHECK(c.tsi_delta == 0.5);
  CHECK_THROWS_AS(ServeConfig::FromJson({{"no_such_key", 1}}), Error);
  CHECK_THROWS_AS(ServeConfig::FromJson({{"listen_port", "abc"}}), Error);

  std::map<std::string, std::string> env = {{"ADSTRENGTH_LISTEN_PORT", "9100"},
                                            {"ADSTRENGTH_TSI_DELTA", "0.25"},
                                            {"ADSTRENGTH_EMBEDDER", "tfidf"}};
  c.ApplyEnv([&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(c.listen_port == 9100);
  CHECK(c.tsi_delta == 0.25);
  CHECK(c.embedder == "tfidf");
  CHECK(c.pool_path == "/tmp/pool.jsonl");
  env = {{"ADSTRENGTH_LISTEN_PORT", "not-a-number"}};
  CHECK_THROWS_AS(c.ApplyEnv([&](const char* name) -> const char* {
                    auto it = env.find(name);
                    return it == env.end() ? nullptr : it->second.c_str();
                  }),
                  Error);
  CHECK(ServeConfig::FromJson(c.ToJson()).ToJson() == c.ToJson());
  CHECK(c.ToServiceOptions().tsi.delta == 0.25);
}

TEST_CASE("state factory serves the worked example") {
  ServeConfig c;
  c.pool_path = (testing::DataDir() / "worked_pool.jsonl").string();
  c.pctr_table = (testing::DataDir() / "worked_pctr.json").string();
  c.blocklist_path = (testing::DataDir() / "worked_blocklist.txt").string();
  c.embedder = "tfidf";
  TsiService service(c.ToServiceOptions(), MakeStateFactory(c));
  service.Rebuild();
  const auto out = service.HandleTsi({{"title", "Sunny Beach Resort"},
                                      {"description", "Book your summer beach getaway today"},
                                      {"cta", "Book Now"}});
  CHECK(out["tsi"] == 0);
  CHECK(out["pctr"] == doctest::Approx(0.02));
  CHECK(out["median_above"] == doctest::Approx(0.0285));
  REQUIRE(out["suggestions"].size() == 2);
  CHECK(out["suggestions"][0]["pctr"] == doctest::Approx(0.03));
  CHECK(out["suggestions"][1]["pctr"] == doctest::Approx(0.027));
}

TEST_CASE("http frontend") {
  const AdPool pool = BeachPool(30);
  TsiService service(LooseOptions());
  HttpFrontend http(service, 4);
  const int port = http.Bind("127.0.0.1", 0);
  std::thread server([&] { http.Serve(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(5, 0);
  for (int i = 0; i < 100; ++i) {
    if (client.Get("/v1/healthz")) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  auto health = client.Get("/v1/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(nlohmann::json::parse(health->body)["ready"] == false);
  CHECK(client.Post("/v1/tsi", kRequest.dump(), "application/json")->status == 503);
  CHECK(client.Post("/v1/index/rebuild", "", "application/json")->status == 409);

  service.Install(LevelState(pool, 0.01));
  auto ok = client.Post("/v1/tsi", kRequest.dump(), "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(nlohmann::json::parse(ok->body)["tsi"] == 0);
  CHECK(client.Post("/v1/tsi", "{not json", "application/json")->status == 400);
  CHECK(client.Post("/v1/tsi", "{}", "application/json")->status == 400);
  CHECK(client.Post("/v1/similar", R"({"title": "beach", "k": 3})", "application/json")->status == 200);
  CHECK(client.Post("/v1/pctr", R"({"title": "beach"})", "application/json")->status == 200);
  CHECK(client.Post("/v1/events", R"({"advertiser_id": "a"})", "application/json")->status == 400);
  CHECK(service.events_appended() == 0);
  http.Stop();
  server.join();
}

}  // TEST_SUITE
