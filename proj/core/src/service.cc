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

#include "adstrength/service.h"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "httplib.h"

#include "adstrength/error.h"
#include "adstrength/pipeline.h"

namespace adstrength {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool IsBlank(const std::string& s) {
  for (unsigned char c : s) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

std::string OptionalString(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return "";
  if (!it->is_string()) Fail(ErrorKind::kInvalidArgument, std::string(key) + " must be a string");
  return it->get<std::string>();
}

template <typename T>
T WaitFor(std::future<T>& future, Clock::time_point deadline, const char* what) {
  if (future.wait_until(deadline) != std::future_status::ready) {
    Fail(ErrorKind::kTimeout, std::string(what) + " exceeded its time budget");
  }
  return future.get();
}

}  // namespace

WorkerPool::WorkerPool(size_t threads) {
  if (threads == 0) threads = 1;
  for (size_t i = 0; i < threads; ++i) threads_.emplace_back([this] { Run(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::Enqueue(std::function<void()> job) {
  {
    std::lock_guard lock(mu_);
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

void WorkerPool::Run() {
  for (;;) {
    std::function<void()> job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !jobs_.empty(); });
      if (jobs_.empty()) return;
      job = std::move(jobs_.front());
      jobs_.pop_front();
    }
    job();
  }
}

int HttpStatusFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kParse:
      return 400;
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kFailedPrecondition:
      return 409;
    case ErrorKind::kUnavailable:
      return 503;
    case ErrorKind::kTimeout:
      return 504;
    case ErrorKind::kNetwork:
    case ErrorKind::kMalformedResponse:
    case ErrorKind::kOutOfRange:
      return 502;
    default:
      return 500;
  }
}

TsiService::TsiService(ServiceOptions options, StateFactory factory)
    : options_(std::move(options)),
      factory_(std::move(factory)),
      workers_(options_.worker_threads) {
  options_.tsi.Validate();
  if (options_.pctr_budget.count() <= 0 || options_.retrieval_budget.count() <= 0 ||
      options_.total_budget.count() <= 0) {
    Fail(ErrorKind::kInvalidArgument, "time budgets must be positive");
  }
}

TsiService::~TsiService() { WaitForRebuild(); }

void TsiService::Install(ServingState state) {
  if (!state.index || !state.pctr || !state.embedder) {
    Fail(ErrorKind::kInvalidArgument, "serving state is incomplete");
  }
  if (state.anonymized.size() != state.index->size()) {
    Fail(ErrorKind::kInvalidArgument, "anonymized texts do not match the index");
  }
  if (state.embedder->dimension() != state.index->dimension()) {
    Fail(ErrorKind::kInvalidArgument, "embedder dimension does not match the index");
  }
  if (state.index_digest.empty()) state.index_digest = state.index->Digest();
  std::lock_guard lock(state_mu_);
  state.generation = next_generation_++;
  state_ = std::make_shared<const ServingState>(std::move(state));
}

std::shared_ptr<const ServingState> TsiService::Snapshot() const {
  std::lock_guard lock(state_mu_);
  return state_;
}

std::shared_ptr<const ServingState> TsiService::ReadySnapshot() const {
  auto state = Snapshot();
  if (!state) Fail(ErrorKind::kUnavailable, "index not ready");
  return state;
}

void TsiService::Rebuild() {
  if (!factory_) Fail(ErrorKind::kFailedPrecondition, "no pool path configured for rebuild");
  try {
    Install(factory_());
    std::lock_guard lock(error_mu_);
    last_rebuild_error_.clear();
  } catch (const std::exception& e) {
    std::lock_guard lock(error_mu_);
    last_rebuild_error_ = e.what();
    throw;
  }
}

bool TsiService::StartRebuild() {
  if (!factory_) Fail(ErrorKind::kFailedPrecondition, "no pool path configured for rebuild");
  std::lock_guard lock(rebuild_mu_);
  if (rebuilding_.exchange(true)) return false;
  if (rebuild_thread_.joinable()) rebuild_thread_.join();
  rebuild_thread_ = std::thread([this] {
    try {
      Rebuild();
    } catch (const std::exception&) {
      // Recorded in last_rebuild_error_; the old snapshot keeps serving.
    }
    rebuilding_.store(false);
  });
  return true;
}

void TsiService::WaitForRebuild() {
  std::lock_guard lock(rebuild_mu_);
  if (rebuild_thread_.joinable()) rebuild_thread_.join();
}

TsiService::Composed TsiService::ParseAdRequest(const json& body) {
  if (!body.is_object()) Fail(ErrorKind::kInvalidArgument, "request body must be a JSON object");
  const std::string title = OptionalString(body, "title");
  const std::string description = OptionalString(body, "description");
  const std::string cta = OptionalString(body, "cta");
  if (IsBlank(title) && IsBlank(description) && IsBlank(cta)) {
    Fail(ErrorKind::kInvalidArgument, "at least one of title, description, cta must be non-empty");
  }
  Composed out;
  out.text = ComposeAdText(title, description, cta);
  out.publisher = OptionalString(body, "publisher");
  if (out.publisher.empty()) out.publisher = std::string(kOtherPublisher);
  return out;
}

double TsiService::TimedPctr(const std::shared_ptr<const ServingState>& state,
                             const Composed& req, Clock::time_point deadline) const {
  auto future = workers_.Submit([state, req] { return state->pctr->Predict(req.text, req.publisher); });
  return WaitFor(future, deadline, "pCTR call");
}

std::vector<Neighbor> TsiService::TimedRetrieve(const std::shared_ptr<const ServingState>& state,
                                                const std::string& text,
                                                const QueryOptions& query,
                                                Clock::time_point deadline) const {
  auto future = workers_.Submit([state, text, query] {
    const Embedding v = state->embedder->Embed(text);
    return state->index->QueryApprox(v, query);
  });
  return WaitFor(future, deadline, "retrieval call");
}

json TsiService::HandleTsi(const json& body) const {
  const auto start = Clock::now();
  const Composed req = ParseAdRequest(body);
  const auto state = ReadySnapshot();
  const auto total_deadline = start + options_.total_budget;
  QueryOptions query;
  query.k = options_.tsi.k;
  query.min_sim = options_.tsi.min_sim;

  // Both calls are in flight before either is awaited.
  auto pctr_future = workers_.Submit(
      [state, req] { return state->pctr->Predict(req.text, req.publisher); });
  auto retrieve_future = workers_.Submit([state, text = req.text.full_text, query] {
    const Embedding v = state->embedder->Embed(text);
    return state->index->QueryApprox(v, query);
  });
  const double pctr =
      WaitFor(pctr_future, std::min(start + options_.pctr_budget, total_deadline), "pCTR call");
  std::vector<Neighbor> neighbors = WaitFor(
      retrieve_future, std::min(start + options_.retrieval_budget, total_deadline),
      "retrieval call");

  const size_t considered = neighbors.size();
  const TsiResult result = ScoreTsi(pctr, std::move(neighbors), options_.tsi);
  json suggestions = json::array();
  for (const auto& s : result.suggestions) {
    const size_t row = *state->index->RowOf(s.neighbor.ad_id);
    suggestions.push_back({{"anonymized_text", state->anonymized[row]},
                           {"pctr", s.neighbor.pctr},
                           {"similarity", s.neighbor.similarity},
                           {"lift", s.lift}});
  }
  json out = {{"pctr", result.input_pctr},
              {"tsi", result.tsi},
              {"suggestions", std::move(suggestions)},
              {"neighbors_considered", considered},
              {"median_above", nullptr},
              {"index_generation", state->generation}};
  if (result.median_above) out["median_above"] = *result.median_above;
  out["latency_ms"] = MillisSince(start);
  return out;
}

json TsiService::HandlePctr(const json& body) const {
  const auto start = Clock::now();
  const Composed req = ParseAdRequest(body);
  const auto state = ReadySnapshot();
  const double pctr =
      TimedPctr(state, req, std::min(start + options_.pctr_budget, start + options_.total_budget));
  return {{"pctr", pctr},
          {"publisher", req.publisher},
          {"index_generation", state->generation},
          {"latency_ms", MillisSince(start)}};
}

json TsiService::HandleSimilar(const json& body) const {
  const auto start = Clock::now();
  const Composed req = ParseAdRequest(body);
  QueryOptions query;
  query.k = options_.tsi.k;
  query.min_sim = options_.tsi.min_sim;
  if (auto it = body.find("k"); it != body.end()) {
    if (!it->is_number_integer() || it->get<int64_t>() < 1 || it->get<int64_t>() > 1000) {
      Fail(ErrorKind::kInvalidArgument, "k must be an integer in [1, 1000]");
    }
    query.k = it->get<size_t>();
  }
  if (auto it = body.find("min_sim"); it != body.end()) {
    if (!it->is_number() || it->get<double>() < -1.0 || it->get<double>() > 1.0) {
      Fail(ErrorKind::kInvalidArgument, "min_sim must be a number in [-1, 1]");
    }
    query.min_sim = it->get<double>();
  }
  const auto state = ReadySnapshot();
  const auto neighbors =
      TimedRetrieve(state, req.text.full_text, query,
                    std::min(start + options_.retrieval_budget, start + options_.total_budget));
  json list = json::array();
  for (const auto& n : neighbors) {
    const size_t row = *state->index->RowOf(n.ad_id);
    list.push_back({{"ad_id", n.ad_id},
                    {"similarity", n.similarity},
                    {"pctr", n.pctr},
                    {"anonymized_text", state->anonymized[row]}});
  }
  return {{"neighbors", std::move(list)},
          {"index_generation", state->generation},
          {"latency_ms", MillisSince(start)}};
}

json TsiService::HandleEvents(const json& body) {
  std::vector<UiEvent> events;
  try {
    if (body.is_array()) {
      for (const auto& item : body) events.push_back(EventFromJson(item));
    } else {
      events.push_back(EventFromJson(body));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kInvalidArgument, std::string("malformed event: ") + e.what());
  }
  std::lock_guard lock(events_mu_);
  if (options_.events_log) {
    std::ofstream out(*options_.events_log, std::ios::app);
    if (!out) Fail(ErrorKind::kIo, "cannot open event log " + options_.events_log->string());
    std::string buffer;
    for (const auto& e : events) buffer += EventToJson(e).dump() + "\n";
    out << buffer;
    out.flush();
    if (!out) Fail(ErrorKind::kIo, "failed writing event log");
  } else {
    memory_log_.insert(memory_log_.end(), events.begin(), events.end());
  }
  events_appended_ += events.size();
  return {{"appended", events.size()}};
}

size_t TsiService::events_appended() const {
  std::lock_guard lock(events_mu_);
  return events_appended_;
}

json TsiService::Health() const {
  const auto state = Snapshot();
  json out = {{"ready", state != nullptr},
              {"pool_size", state ? state->index->size() : 0},
              {"index_digest", nullptr},
              {"generation", state ? state->generation : 0},
              {"rebuilding", rebuilding_.load()}};
  if (state) out["index_digest"] = state->index_digest;
  std::lock_guard lock(error_mu_);
  if (!last_rebuild_error_.empty()) out["last_rebuild_error"] = last_rebuild_error_;
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <typename Config, typename Fn>
void VisitFields(Config& c, Fn&& fn) {
  fn("listen_host", c.listen_host);
  fn("listen_port", c.listen_port);
  fn("http_threads", c.http_threads);
  fn("pool_path", c.pool_path);
  fn("vocab_path", c.vocab_path);
  fn("model_path", c.model_path);
  fn("pctr_endpoint", c.pctr_endpoint);
  fn("pctr_table", c.pctr_table);
  fn("embedder", c.embedder);
  fn("embed_dim", c.embed_dim);
  fn("embed_seed", c.embed_seed);
  fn("embed_endpoint", c.embed_endpoint);
  fn("blocklist_path", c.blocklist_path);
  fn("index_path", c.index_path);
  fn("events_log", c.events_log);
  fn("top_publishers", c.top_publishers);
  fn("pctr_budget_ms", c.pctr_budget_ms);
  fn("retrieval_budget_ms", c.retrieval_budget_ms);
  fn("total_budget_ms", c.total_budget_ms);
  fn("worker_threads", c.worker_threads);
  fn("tsi_k", c.tsi_k);
  fn("tsi_delta", c.tsi_delta);
  fn("tsi_min_sim", c.tsi_min_sim);
  fn("index_nlist", c.index_nlist);
  fn("index_nprobe", c.index_nprobe);
  fn("index_seed", c.index_seed);
}

template <typename T>
void ParseScalar(const std::string& key, const std::string& text, T& field) {
  if constexpr (std::is_same_v<T, std::string>) {
    field = text;
  } else {
    size_t used = 0;
    try {
      if constexpr (std::is_floating_point_v<T>) {
        field = std::stod(text, &used);
      } else if constexpr (std::is_signed_v<T>) {
        field = static_cast<T>(std::stoll(text, &used));
      } else {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        field = static_cast<T>(std::stoull(text, &used));
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      Fail(ErrorKind::kInvalidArgument, "bad value '" + text + "' for " + key);
    }
  }
}

}  // namespace

ServeConfig ServeConfig::FromJson(const json& doc) {
  if (!doc.is_object()) Fail(ErrorKind::kInvalidArgument, "service config must be a JSON object");
  ServeConfig config;
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    VisitFields(config, [&](const char* name, auto& field) {
      if (key != name) return;
      known = true;
      try {
        field = value.get<std::decay_t<decltype(field)>>();
      } catch (const json::exception&) {
        Fail(ErrorKind::kInvalidArgument, "bad type for config key " + key);
      }
    });
    if (!known) Fail(ErrorKind::kInvalidArgument, "unknown config key " + key);
  }
  return config;
}

ServeConfig ServeConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open config " + path.string());
  try {
    return FromJson(json::parse(in));
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kParse, "config " + path.string() + ": " + e.what());
  }
}

void ServeConfig::ApplyEnv(const std::function<const char*(const char*)>& getenv) {
  VisitFields(*this, [&](const char* name, auto& field) {
    std::string var = "ADSTRENGTH_";
    for (const char* p = name; *p; ++p) var += static_cast<char>(std::toupper(*p));
    if (const char* value = getenv(var.c_str())) ParseScalar(var, value, field);
  });
}

json ServeConfig::ToJson() const {
  json doc = json::object();
  VisitFields(*this, [&](const char* name, const auto& field) { doc[name] = field; });
  return doc;
}

ServiceOptions ServeConfig::ToServiceOptions() const {
  ServiceOptions options;
  options.tsi.k = tsi_k;
  options.tsi.delta = tsi_delta;
  options.tsi.min_sim = tsi_min_sim;
  options.tsi.Validate();
  options.pctr_budget = std::chrono::milliseconds(pctr_budget_ms);
  options.retrieval_budget = std::chrono::milliseconds(retrieval_budget_ms);
  options.total_budget = std::chrono::milliseconds(total_budget_ms);
  options.worker_threads = worker_threads;
  if (!events_log.empty()) options.events_log = events_log;
  return options;
}

ServingState MakeServingState(std::shared_ptr<const AdIndex> index, const AdPool& pool,
                              std::shared_ptr<const PctrProvider> pctr,
                              std::shared_ptr<const EmbeddingProvider> embedder,
                              const BlockList& blocklist) {
  ServingState state;
  state.anonymized.reserve(index->size());
  for (const auto& id : index->ad_ids()) {
    state.anonymized.push_back(Anonymize(pool.Get(id).Text().full_text, blocklist));
  }
  state.index = std::move(index);
  state.pctr = std::move(pctr);
  state.embedder = std::move(embedder);
  return state;
}

ServingState MakeServingState(const AdPool& pool, std::shared_ptr<const PctrProvider> pctr,
                              std::shared_ptr<const EmbeddingProvider> embedder,
                              const BlockList& blocklist, const IndexParams& params) {
  auto index = std::make_shared<const AdIndex>(AdIndex::Build(pool, *embedder, *pctr, params));
  return MakeServingState(std::move(index), pool, std::move(pctr), std::move(embedder),
                          blocklist);
}

StateFactory MakeStateFactory(const ServeConfig& config) {
  if (config.pool_path.empty()) Fail(ErrorKind::kInvalidArgument, "pool_path is required");
  std::shared_ptr<const Vocab> vocab;
  if (!config.vocab_path.empty()) vocab = std::make_shared<const Vocab>(Vocab::Load(config.vocab_path));

  std::shared_ptr<const PctrProvider> pctr;
  if (!config.pctr_endpoint.empty()) {
    HttpClientOptions http;
    http.timeout = std::chrono::milliseconds(config.pctr_budget_ms);
    pctr = std::make_shared<const ExternalPctrClient>(config.pctr_endpoint, http);
  } else if (!config.pctr_table.empty()) {
    pctr = std::make_shared<const TablePctrProvider>(TablePctrProvider::Load(config.pctr_table));
  } else if (!config.model_path.empty()) {
    if (!vocab) Fail(ErrorKind::kInvalidArgument, "model_path requires vocab_path");
    pctr = std::make_shared<const LinearCtrModel>(LinearCtrModel::Load(config.model_path, vocab));
  } else {
    Fail(ErrorKind::kInvalidArgument, "one of pctr_endpoint, pctr_table, model_path is required");
  }

  std::shared_ptr<const EmbeddingProvider> embedder;
  if (config.embedder == "hashed") {
    embedder = std::make_shared<const HashedProjectionProvider>(config.embed_dim, config.embed_seed);
  } else if (config.embedder == "tfidf") {
    if (!vocab) {
      // Without a vocab file the tf-idf space is fitted on the pool itself.
      const AdPool pool = LoadPool(config.pool_path, config.top_publishers);
      std::vector<std::string> ids;
      for (const auto& ad : pool.ads()) ids.push_back(ad.ad_id);
      vocab = std::make_shared<const Vocab>(BuildVocab(pool, ids));
    }
    embedder = std::make_shared<const TfidfProvider>(vocab);
  } else if (config.embedder == "http") {
    HttpClientOptions http;
    http.timeout = std::chrono::milliseconds(config.retrieval_budget_ms);
    embedder = std::make_shared<const ExternalEmbeddingClient>(config.embed_endpoint,
                                                               config.embed_dim, http);
  } else {
    Fail(ErrorKind::kInvalidArgument, "unknown embedder '" + config.embedder + "'");
  }

  auto blocklist = std::make_shared<const BlockList>(
      config.blocklist_path.empty() ? BlockList({}) : BlockList::Load(config.blocklist_path));
  IndexParams params;
  params.nlist = config.index_nlist;
  params.nprobe = config.index_nprobe;
  params.build_seed = config.index_seed;

  auto first = std::make_shared<std::atomic<bool>>(true);
  return [config, pctr, embedder, blocklist, params, first]() {
    const AdPool pool = LoadPool(config.pool_path, config.top_publishers);
    if (first->exchange(false) && !config.index_path.empty() &&
        std::filesystem::exists(config.index_path)) {
      auto index = std::make_shared<const AdIndex>(AdIndex::Load(config.index_path));
      for (const auto& id : index->ad_ids()) {
        if (!pool.Find(id)) {
          Fail(ErrorKind::kFailedPrecondition, "index ad " + id + " is not in the pool");
        }
      }
      return MakeServingState(std::move(index), pool, pctr, embedder, *blocklist);
    }
    return MakeServingState(pool, pctr, embedder, *blocklist, params);
  };
}

// ---------------------------------------------------------------------------
// HTTP

struct HttpFrontend::Impl {
  TsiService& service;
  httplib::Server server;

  Impl(TsiService& s, size_t threads) : service(s) {
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    Post("/v1/tsi", [this](const json& body) { return service.HandleTsi(body); });
    Post("/v1/pctr", [this](const json& body) { return service.HandlePctr(body); });
    Post("/v1/similar", [this](const json& body) { return service.HandleSimilar(body); });
    Post("/v1/events", [this](const json& body) { return service.HandleEvents(body); });
    server.Post("/v1/index/rebuild", [this](const httplib::Request&, httplib::Response& res) {
      Respond(res, [&]() -> json {
        if (!service.StartRebuild()) {
          Fail(ErrorKind::kFailedPrecondition, "a rebuild is already running");
        }
        res.status = 202;
        return {{"accepted", true}};
      });
    });
    server.Get("/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
      Respond(res, [&] { return service.Health(); });
    });
  }

  template <typename Fn>
  void Respond(httplib::Response& res, Fn&& fn) {
    try {
      json out = fn();
      res.set_content(out.dump(), "application/json");
    } catch (const Error& e) {
      res.status = HttpStatusFor(e.kind());
      res.set_content(
          json{{"error", std::string(ErrorKindName(e.kind()))}, {"message", e.what()}}.dump(),
          "application/json");
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", "invalid_argument"}, {"message", e.what()}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", "internal"}, {"message", e.what()}}.dump(),
                      "application/json");
    }
  }

  template <typename Handler>
  void Post(const char* path, Handler handler) {
    server.Post(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
      Respond(res, [&] {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error& e) {
          Fail(ErrorKind::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
        }
        return handler(body);
      });
    });
  }
};

HttpFrontend::HttpFrontend(TsiService& service, size_t threads)
    : impl_(std::make_unique<Impl>(service, threads)) {}

HttpFrontend::~HttpFrontend() { Stop(); }

int HttpFrontend::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) Fail(ErrorKind::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    Fail(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpFrontend::Serve() { impl_->server.listen_after_bind(); }

void HttpFrontend::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace adstrength
