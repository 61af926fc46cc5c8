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

#ifndef ADSTRENGTH_SERVICE_H_
#define ADSTRENGTH_SERVICE_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "adstrength/analytics.h"
#include "adstrength/annindex.h"
#include "adstrength/anonymize.h"
#include "adstrength/corpus.h"
#include "adstrength/ctrmodel.h"
#include "adstrength/error.h"
#include "adstrength/embed.h"
#include "adstrength/tsicore.h"

namespace adstrength {

// Everything one request needs, immutable once installed. Requests pin a
// snapshot for their whole lifetime, so a swap never tears a response.
struct ServingState {
  std::shared_ptr<const AdIndex> index;
  std::shared_ptr<const PctrProvider> pctr;
  std::shared_ptr<const EmbeddingProvider> embedder;
  std::vector<std::string> anonymized;  // aligned with index rows
  std::string index_digest;             // filled in by Install when empty
  uint64_t generation = 0;
};

using StateFactory = std::function<ServingState()>;

struct ServiceOptions {
  TsiConfig tsi;
  std::chrono::milliseconds pctr_budget{200};
  std::chrono::milliseconds retrieval_budget{200};
  std::chrono::milliseconds total_budget{900};
  size_t worker_threads = 8;
  std::optional<std::filesystem::path> events_log;
};

class WorkerPool {
 public:
  explicit WorkerPool(size_t threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  template <typename F>
  auto Submit(F&& fn) -> std::future<decltype(fn())> {
    using R = decltype(fn());
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
    auto future = task->get_future();
    Enqueue([task] { (*task)(); });
    return future;
  }

 private:
  void Enqueue(std::function<void()> job);
  void Run();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// Transport-independent request handling. Handlers take and return JSON and
// throw Error; HttpStatusFor maps the error kind to a status code.
class TsiService {
 public:
  explicit TsiService(ServiceOptions options, StateFactory factory = {});
  ~TsiService();

  // Assigns the next generation and swaps the snapshot in.
  void Install(ServingState state);
  std::shared_ptr<const ServingState> Snapshot() const;

  // Runs the factory on the calling thread; on failure the old snapshot
  // stays and the error is rethrown.
  void Rebuild();
  // Starts a background rebuild. False when one is already running.
  bool StartRebuild();
  void WaitForRebuild();
  bool rebuilding() const { return rebuilding_.load(); }
  bool has_factory() const { return static_cast<bool>(factory_); }

  nlohmann::json HandleTsi(const nlohmann::json& body) const;
  nlohmann::json HandlePctr(const nlohmann::json& body) const;
  nlohmann::json HandleSimilar(const nlohmann::json& body) const;
  nlohmann::json HandleEvents(const nlohmann::json& body);
  nlohmann::json Health() const;

  size_t events_appended() const;
  const std::vector<UiEvent>& memory_log() const { return memory_log_; }
  const ServiceOptions& options() const { return options_; }

 private:
  struct Composed {
    AdText text;
    std::string publisher;
  };
  static Composed ParseAdRequest(const nlohmann::json& body);
  std::shared_ptr<const ServingState> ReadySnapshot() const;
  double TimedPctr(const std::shared_ptr<const ServingState>& state, const Composed& req,
                   std::chrono::steady_clock::time_point deadline) const;
  std::vector<Neighbor> TimedRetrieve(const std::shared_ptr<const ServingState>& state,
                                      const std::string& text, const QueryOptions& query,
                                      std::chrono::steady_clock::time_point deadline) const;

  ServiceOptions options_;
  StateFactory factory_;
  mutable std::mutex state_mu_;
  std::shared_ptr<const ServingState> state_;
  uint64_t next_generation_ = 1;

  std::atomic<bool> rebuilding_{false};
  std::mutex rebuild_mu_;
  std::thread rebuild_thread_;
  mutable std::mutex error_mu_;
  std::string last_rebuild_error_;

  mutable std::mutex events_mu_;
  size_t events_appended_ = 0;
  std::vector<UiEvent> memory_log_;

  mutable WorkerPool workers_;
};

int HttpStatusFor(ErrorKind kind);

// Flat service configuration; every key can be overridden by an environment
// variable ADSTRENGTH_<KEY in upper case>.
struct ServeConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  size_t http_threads = 32;
  std::string pool_path;
  std::string vocab_path;
  std::string model_path;
  std::string pctr_endpoint;
  std::string pctr_table;
  std::string embedder = "hashed";  // hashed | tfidf | http
  size_t embed_dim = 128;
  uint64_t embed_seed = 7;
  std::string embed_endpoint;
  std::string blocklist_path;
  std::string index_path;
  std::string events_log;
  size_t top_publishers = 13;
  int64_t pctr_budget_ms = 200;
  int64_t retrieval_budget_ms = 200;
  int64_t total_budget_ms = 900;
  size_t worker_threads = 8;
  size_t tsi_k = kDefaultNeighbors;
  double tsi_delta = 0.30;
  double tsi_min_sim = kDefaultMinSimilarity;
  size_t index_nlist = 0;
  size_t index_nprobe = 0;
  uint64_t index_seed = 17;

  static ServeConfig FromJson(const nlohmann::json& doc);
  static ServeConfig Load(const std::filesystem::path& path);
  // `getenv` is injectable for tests.
  void ApplyEnv(const std::function<const char*(const char*)>& getenv);
  nlohmann::json ToJson() const;
  ServiceOptions ToServiceOptions() const;
};

// Loads the pool, providers and block list named by the config and returns
// a factory that (re)builds the index from the pool path on every call.
StateFactory MakeStateFactory(const ServeConfig& config);

// Assembles a serving state from already-constructed parts.
ServingState MakeServingState(const AdPool& pool,
                              std::shared_ptr<const PctrProvider> pctr,
                              std::shared_ptr<const EmbeddingProvider> embedder,
                              const BlockList& blocklist, const IndexParams& params);
ServingState MakeServingState(std::shared_ptr<const AdIndex> index, const AdPool& pool,
                              std::shared_ptr<const PctrProvider> pctr,
                              std::shared_ptr<const EmbeddingProvider> embedder,
                              const BlockList& blocklist);

class HttpFrontend {
 public:
  HttpFrontend(TsiService& service, size_t threads);
  ~HttpFrontend();

  // Returns the bound port.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  void Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace adstrength

#endif  // ADSTRENGTH_SERVICE_H_
