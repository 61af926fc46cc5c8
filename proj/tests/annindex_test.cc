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

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "adstrength/annindex.h"
#include "adstrength/error.h"
#include "adstrength/random.h"
#include "oracles.h"
#include "support.h"

using namespace adstrength;

namespace {

struct Fixture {
  std::vector<std::string> ids;
  std::vector<float> flat;
  std::vector<double> pctrs;
  size_t dim;
};

// Gaussian rows plus a few exact duplicates so ties occur.
Fixture RandomFixture(uint64_t seed, size_t n, size_t dim) {
  Rng rng(seed);
  Fixture f{{}, {}, {}, dim};
  for (size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "id%05zu", (i * 7919) % n);
    f.ids.push_back(id);
    if (i > 0 && i % 10 == 0) {
      const size_t src = (i - 1) * dim;
      for (size_t j = 0; j < dim; ++j) f.flat.push_back(f.flat[src + j]);
    } else {
      for (size_t j = 0; j < dim; ++j) f.flat.push_back(static_cast<float>(rng.Normal()));
    }
    f.pctrs.push_back(0.001 + 0.1 * rng.Uniform());
  }
  return f;
}

AdIndex BuildIndex(const Fixture& f, IndexParams params = {}) {
  return AdIndex::FromVectors(f.ids, f.flat, f.dim, f.pctrs, params);
}

std::vector<std::vector<float>> StoredRows(const AdIndex& index) {
  std::vector<std::vector<float>> rows;
  for (size_t r = 0; r < index.size(); ++r) {
    auto row = index.Row(r);
    rows.emplace_back(row.begin(), row.end());
  }
  return rows;
}

Embedding RandomQuery(Rng& rng, size_t dim) {
  Embedding q(dim);
  for (auto& v : q) v = static_cast<float>(rng.Normal());
  NormalizeInPlace(q);
  return q;
}

}  // namespace

TEST_SUITE("annindex") {

TEST_CASE("exact query matches the brute-force oracle") {
  const Fixture f = RandomFixture(1, 600, 16);
  const AdIndex index = BuildIndex(f);
  const auto rows = StoredRows(index);
  Rng rng(2);
  for (int q = 0; q < 100; ++q) {
    Embedding query = q % 5 == 0 ? Embedding(rows[static_cast<size_t>(q)].begin(),
                                             rows[static_cast<size_t>(q)].end())
                                 : RandomQuery(rng, 16);
    const size_t k = 1 + rng.Below(20);
    const double floor = q % 3 == 0 ? -1.0 : 0.1;
    const auto got = index.QueryExact(query, {k, floor, std::nullopt});
    const auto want = oracle::ScanTopK(index.ad_ids(), rows, query, k, floor);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].ad_id == want[i].id);
      CHECK(std::abs(got[i].similarity - want[i].similarity) < 1e-12);
      CHECK(got[i].pctr == f.pctrs[*index.RowOf(got[i].ad_id)]);
    }
  }
}

TEST_CASE("exclusion and short results") {
  const Fixture f = RandomFixture(3, 50, 8);
  const AdIndex index = BuildIndex(f);
  const auto rows = StoredRows(index);
  const Embedding query(rows[4].begin(), rows[4].end());
  const std::string self = index.ad_ids()[4];
  const auto with_self = index.QueryExact(query, {5, -1.0, std::nullopt});
  CHECK(with_self.front().similarity == doctest::Approx(1.0));
  for (bool approx : {false, true}) {
    const QueryOptions opts{1000, -1.0, self};
    const auto res = approx ? index.QueryApprox(query, opts) : index.QueryExact(query, opts);
    for (const auto& nb : res) CHECK(nb.ad_id != self);
    if (!approx) CHECK(res.size() == 49);
  }
  CHECK(index.QueryExact(query, {5, 1.01, std::nullopt}).empty());
  CHECK_THROWS_AS(index.QueryExact(query, {0, -1.0, std::nullopt}), Error);
  CHECK_THROWS_AS(index.QueryExact(Embedding(3, 0.0f), {5, -1.0, std::nullopt}), Error);
}

TEST_CASE("approximate results are a valid subset") {
  const Fixture f = RandomFixture(4, 2000, 24);
  IndexParams params;
  params.nlist = 40;
  params.nprobe = 3;
  const AdIndex index = BuildIndex(f, params);
  CHECK(index.nlist() == 40);
  CHECK(index.nprobe() == 3);
  const auto rows = StoredRows(index);
  Rng rng(5);
  for (int q = 0; q < 50; ++q) {
    const Embedding query = RandomQuery(rng, 24);
    const auto approx = index.QueryApprox(query, {10, 0.0, std::nullopt});
    CHECK(approx.size() <= 10);
    for (size_t i = 0; i < approx.size(); ++i) {
      const auto row = index.RowOf(approx[i].ad_id);
      REQUIRE(row.has_value());
      CHECK(approx[i].similarity >= 0.0);
      CHECK(std::abs(approx[i].similarity - Cosine(rows[*row], query)) < 1e-6);
      if (i > 0) {
        const bool ordered = approx[i - 1].similarity > approx[i].similarity ||
                             (approx[i - 1].similarity == approx[i].similarity &&
                              approx[i - 1].ad_id < approx[i].ad_id);
        CHECK(ordered);
      }
    }
  }
}

TEST_CASE("probing every list equals the exact scan") {
  const Fixture f = RandomFixture(6, 800, 12);
  IndexParams params;
  params.nlist = 20;
  params.nprobe = 20;
  const AdIndex index = BuildIndex(f, params);
  Rng rng(7);
  for (int q = 0; q < 30; ++q) {
    const Embedding query = RandomQuery(rng, 12);
    const QueryOptions opts{15, -1.0, std::nullopt};
    CHECK(index.QueryApprox(query, opts) == index.QueryExact(query, opts));
  }
  std::vector<Embedding> queries;
  for (int q = 0; q < 10; ++q) queries.push_back(RandomQuery(rng, 12));
  CHECK(RecallAtK(index, queries, 10) == 1.0);
}

TEST_CASE("recall matches a scripted computation") {
  const Fixture f = RandomFixture(8, 1500, 16);
  IndexParams params;
  params.nlist = 30;
  params.nprobe = 2;
  const AdIndex index = BuildIndex(f, params);
  const auto rows = StoredRows(index);
  Rng rng(9);
  std::vector<Embedding> queries;
  for (int q = 0; q < 40; ++q) queries.push_back(RandomQuery(rng, 16));
  double total = 0.0;
  for (const auto& q : queries) {
    const auto truth = oracle::ScanTopK(index.ad_ids(), rows, q, 10, -1.0);
    std::set<std::string> ids;
    for (const auto& h : truth) ids.insert(h.id);
    size_t hits = 0;
    for (const auto& nb : index.QueryApprox(q, {10, -1.0, std::nullopt})) hits += ids.count(nb.ad_id);
    total += static_cast<double>(hits) / 10.0;
  }
  const double recall = RecallAtK(index, queries, 10);
  CHECK(recall == doctest::Approx(total / 40.0).epsilon(1e-12));
  CHECK(recall < 1.0);
}

TEST_CASE("default parameters derive from pool size") {
  const Fixture f = RandomFixture(10, 900, 8);
  const AdIndex index = BuildIndex(f);
  CHECK(index.nlist() == 30);
  CHECK(index.nprobe() == 24);
}

TEST_CASE("build is deterministic and persists") {
  const Fixture f = RandomFixture(11, 700, 10);
  const AdIndex a = BuildIndex(f);
  const AdIndex b = BuildIndex(f);
  CHECK(a.Digest() == b.Digest());
  IndexParams other;
  other.build_seed = 99;
  CHECK(BuildIndex(f, other).Digest() != a.Digest());

  testing::TempDir dir;
  a.Save(dir / "index.bin");
  const AdIndex loaded = AdIndex::Load(dir / "index.bin");
  CHECK(loaded.Digest() == a.Digest());
  CHECK(loaded.nprobe() == a.nprobe());
  CHECK(loaded.pctrs() == a.pctrs());
  Rng rng(12);
  for (int q = 0; q < 10; ++q) {
    const Embedding query = RandomQuery(rng, 10);
    const QueryOptions opts{7, -1.0, std::nullopt};
    CHECK(loaded.QueryApprox(query, opts) == a.QueryApprox(query, opts));
    CHECK(loaded.QueryExact(query, opts) == a.QueryExact(query, opts));
  }

  testing::WriteFile(dir / "bad.bin", "not an index");
  CHECK_THROWS_AS(AdIndex::Load(dir / "bad.bin"), Error);
  const std::string bytes = testing::ReadFile(dir / "index.bin");
  testing::WriteFile(dir / "short.bin", bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(AdIndex::Load(dir / "short.bin"), Error);
}

TEST_CASE("build from a pool stores provider pctrs") {
  std::vector<Ad> ads = {
      testing::MakeAd("a1", "v1", "c1", "g1", "travel", "beach resort"),
      testing::MakeAd("a2", "v1", "c1", "g1", "travel", "mountain resort"),
      testing::MakeAd("a3", "v2", "c2", "g2", "shoes", "running shoes"),
  };
  const AdPool pool = AdPool::Create(ads, 13);
  HashedProjectionProvider embedder(32, 1);
  ConstantPctrProvider pctr(0.03);
  const AdIndex index = AdIndex::Build(pool, embedder, pctr);
  CHECK(index.size() == 3);
  for (double p : index.pctrs()) CHECK(p == 0.03);
  const auto res = index.QueryExact(embedder.Embed("beach resort"), {1, -1.0, std::nullopt});
  REQUIRE(res.size() == 1);
  CHECK(res[0].ad_id == "a1");
  CHECK_THROWS_AS(AdIndex::Build(AdPool::Create({}, 13), embedder, pctr), Error);
  CHECK_THROWS_AS(AdIndex::FromVectors({"x", "x"}, {1, 0, 0, 1}, 2, {0.1, 0.1}), Error);
}

}  // TEST_SUITE
