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

#include <cmath>

#include "doctest.h"

#include "adstrength/embed.h"
#include "adstrength/error.h"
#include "adstrength/random.h"
#include "support.h"

using namespace adstrength;

namespace {

double Norm(const Embedding& v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

std::shared_ptr<const Vocab> SmallVocab() {
  std::vector<std::vector<std::string>> docs = {
      Tokenize("cheap flights to paris"), Tokenize("cheap hotels in paris"),
      Tokenize("running shoes sale"), Tokenize("trail running shoes")};
  return std::make_shared<const Vocab>(Vocab::Build(docs, 1));
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("normalize and cosine") {
  std::vector<float> v = {3, 4};
  NormalizeInPlace(v);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  std::vector<float> zero = {0, 0};
  NormalizeInPlace(zero);
  CHECK(zero == std::vector<float>{0, 0});
  CHECK(Cosine(v, v) == doctest::Approx(1.0));
  std::vector<float> neg = {-0.6f, -0.8f};
  CHECK(Cosine(v, neg) == doctest::Approx(-1.0));
  std::vector<float> big = {1.0f, 1.0f};
  CHECK(Cosine(big, big) == 1.0);
}

TEST_CASE("tfidf provider matches normalized sparse features") {
  auto vocab = SmallVocab();
  TfidfProvider provider(vocab);
  CHECK(provider.dimension() == vocab->size());
  const std::string text = "Cheap running shoes in Paris";
  const Embedding e = provider.Embed(text);
  const SparseVec sparse = Featurize(text, *vocab, FeatureScheme::kTfidf);
  const double norm = sparse.Norm2();
  std::vector<double> expected(vocab->size(), 0.0);
  for (const auto& [i, v] : sparse.entries()) expected[i] = v / norm;
  for (size_t i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  CHECK(Norm(e) == doctest::Approx(1.0).epsilon(1e-6));
  const Embedding empty = provider.Embed("zzz qqq");
  CHECK(Norm(empty) == 0.0);
}

TEST_CASE("identical text has cosine one") {
  auto vocab = SmallVocab();
  TfidfProvider tfidf(vocab);
  HashedProjectionProvider hashed(64, 3);
  for (const EmbeddingProvider* p : {static_cast<const EmbeddingProvider*>(&tfidf),
                                     static_cast<const EmbeddingProvider*>(&hashed)}) {
    const auto a = p->Embed("trail running shoes");
    const auto b = p->Embed("Trail, running shoes!");
    CHECK(Cosine(a, b) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("hashed projection is deterministic and seed dependent") {
  HashedProjectionProvider a(128, 7);
  HashedProjectionProvider b(128, 7);
  HashedProjectionProvider c(128, 8);
  const std::string text = "sunny beach resort summer getaway";
  CHECK(a.Embed(text) == b.Embed(text));
  CHECK(a.Embed(text) != c.Embed(text));
  CHECK(a.Embed(text).size() == 128);
  CHECK(Norm(a.Embed(text)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(Norm(a.Embed("")) == 0.0);
  // Shared words raise similarity over unrelated text.
  const double related = Cosine(a.Embed("sunny beach resort"), a.Embed("beach resort deals"));
  const double unrelated = Cosine(a.Embed("sunny beach resort"), a.Embed("tax software download"));
  CHECK(related > unrelated);
}

TEST_CASE("batch equals single embedding") {
  HashedProjectionProvider p(32, 1);
  std::vector<std::string> texts = {"a b", "c d e", ""};
  const auto batch = p.EmbedBatch(texts);
  REQUIRE(batch.size() == 3);
  for (size_t i = 0; i < texts.size(); ++i) CHECK(batch[i] == p.Embed(texts[i]));
}

TEST_CASE("external embedding client batches and normalizes") {
  std::atomic<int> max_batch{0};
  testing::StubServer stub("/embed", [&](const nlohmann::json& req, int&) {
    nlohmann::json vectors = nlohmann::json::array();
    const int n = static_cast<int>(req.at("texts").size());
    if (n > max_batch) max_batch = n;
    for (const auto& t : req.at("texts")) {
      const double len = static_cast<double>(t.get<std::string>().size());
      vectors.push_back({len, 2.0, 0.0});
    }
    return nlohmann::json{{"vectors", vectors}};
  });
  ExternalEmbeddingClient client(stub.url(), 3);
  std::vector<std::string> texts;
  for (int i = 0; i < 130; ++i) texts.push_back(std::string(static_cast<size_t>(i % 7), 'x'));
  const auto out = client.EmbedBatch(texts);
  REQUIRE(out.size() == 130);
  CHECK(client.requests_sent() == 3);
  CHECK(max_batch.load() == 64);
  for (size_t i = 0; i < out.size(); ++i) {
    const double len = static_cast<double>(texts[i].size());
    const double norm = std::sqrt(len * len + 4.0);
    CHECK(out[i][0] == doctest::Approx(len / norm).epsilon(1e-6));
    CHECK(Norm(out[i]) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("external embedding client errors") {
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::kIo;
  };
  SUBCASE("dimension mismatch") {
    testing::StubServer stub("/embed", [](const nlohmann::json&, int&) {
      return nlohmann::json{{"vectors", {{1.0, 2.0}}}};
    });
    ExternalEmbeddingClient client(stub.url(), 3);
    CHECK(kind_of([&] { client.Embed("x"); }) == ErrorKind::kMalformedResponse);
  }
  SUBCASE("wrong count") {
    testing::StubServer stub("/embed", [](const nlohmann::json&, int&) {
      return nlohmann::json{{"vectors", nlohmann::json::array()}};
    });
    ExternalEmbeddingClient client(stub.url(), 3);
    CHECK(kind_of([&] { client.Embed("x"); }) == ErrorKind::kMalformedResponse);
  }
  SUBCASE("server error") {
    testing::StubServer stub("/embed", [](const nlohmann::json&, int& status) {
      status = 500;
      return nlohmann::json{{"error", "boom"}};
    });
    ExternalEmbeddingClient client(stub.url(), 3);
    const ErrorKind kind = kind_of([&] { client.Embed("x"); });
    CHECK((kind == ErrorKind::kNetwork || kind == ErrorKind::kMalformedResponse));
  }
  SUBCASE("timeout") {
    testing::StubServer stub(
        "/embed",
        [](const nlohmann::json&, int&) { return nlohmann::json{{"vectors", {{1, 0, 0}}}}; },
        std::chrono::milliseconds(500));
    ExternalEmbeddingClient client(stub.url(), 3, HttpClientOptions{std::chrono::milliseconds(100)});
    CHECK(kind_of([&] { client.Embed("x"); }) == ErrorKind::kTimeout);
  }
}

}  // TEST_SUITE
