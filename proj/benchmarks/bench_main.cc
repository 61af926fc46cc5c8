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

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "adstrength/annindex.h"
#include "adstrength/embed.h"
#include "adstrength/metrics.h"
#include "adstrength/random.h"
#include "adstrength/tsicore.h"

namespace as = adstrength;

namespace {

struct Fixture {
  size_t n, d;
  std::vector<std::string> ids;
  std::vector<float> flat;
  std::vector<double> pctrs;
  std::vector<as::Embedding> queries;
};

const Fixture& Vectors(size_t n) {
  static std::map<size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Fixture f{n, 128, {}, {}, {}, {}};
  as::Rng rng(7);
  for (size_t i = 0; i < n; ++i) {
    f.ids.push_back("v" + std::to_string(i));
    f.pctrs.push_back(0.001 + 0.05 * rng.Uniform());
    for (size_t j = 0; j < f.d; ++j) f.flat.push_back(static_cast<float>(rng.Normal()));
  }
  as::Rng qrng(8);
  for (int q = 0; q < 256; ++q) {
    as::Embedding e(f.d);
    for (auto& x : e) x = static_cast<float>(qrng.Normal());
    as::NormalizeInPlace(e);
    f.queries.push_back(std::move(e));
  }
  return cache.emplace(n, std::move(f)).first->second;
}

const as::AdIndex& Index(size_t n) {
  static std::map<size_t, as::AdIndex> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const Fixture& f = Vectors(n);
  return cache.emplace(n, as::AdIndex::FromVectors(f.ids, f.flat, f.d, f.pctrs)).first->second;
}

void BM_IndexBuild(benchmark::State& state) {
  const Fixture& f = Vectors(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(as::AdIndex::FromVectors(f.ids, f.flat, f.d, f.pctrs));
  }
}
BENCHMARK(BM_IndexBuild)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_QueryExact(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const as::AdIndex& index = Index(n);
  const auto& queries = Vectors(n).queries;
  size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.QueryExact(queries[q++ % queries.size()], {10, -1.0, std::nullopt}));
  }
}
BENCHMARK(BM_QueryExact)->Arg(10000)->Arg(50000)->Unit(benchmark::kMicrosecond);

void BM_QueryApprox(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const as::AdIndex& index = Index(n);
  const auto& queries = Vectors(n).queries;
  size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.QueryApprox(queries[q++ % queries.size()], {10, -1.0, std::nullopt}));
  }
}
BENCHMARK(BM_QueryApprox)->Arg(10000)->Arg(50000)->Unit(benchmark::kMicrosecond);

void BM_WeightedAuc(benchmark::State& state) {
  as::Rng rng(9);
  std::vector<as::EvalRecord> records;
  for (int64_t i = 0; i < state.range(0); ++i) {
    const int64_t imp = 1 + static_cast<int64_t>(rng.Below(1000));
    const int64_t clicks = static_cast<int64_t>(rng.Below(static_cast<uint64_t>(imp / 10 + 1)));
    records.push_back({"a" + std::to_string(i), rng.Uniform(),
                       static_cast<double>(clicks) / static_cast<double>(imp), clicks, imp});
  }
  for (auto _ : state) benchmark::DoNotOptimize(as::WeightedAuc(records, as::ScoreField::kPctr));
}
BENCHMARK(BM_WeightedAuc)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_ScoreTsi(benchmark::State& state) {
  as::Rng rng(10);
  std::vector<as::Neighbor> neighbors;
  for (int64_t i = 0; i < state.range(0); ++i) {
    neighbors.push_back({"n" + std::to_string(i), 0.9, 0.001 + 0.05 * rng.Uniform()});
  }
  const as::TsiConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(as::ScoreTsi(0.02, neighbors, config));
}
BENCHMARK(BM_ScoreTsi)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
