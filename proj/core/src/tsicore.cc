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

#include "adstrength/tsicore.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "adstrength/error.h"

namespace adstrength {

void TsiConfig::Validate() const {
  if (k < 1) Fail(ErrorKind::kInvalidArgument, "tsi k must be >= 1");
  if (!(delta >= 0)) Fail(ErrorKind::kInvalidArgument, "tsi delta must be >= 0");
  if (!(min_sim >= -1.0 && min_sim <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "tsi min_sim must lie in [-1, 1]");
  }
}

TsiResult ScoreTsi(double input_pctr, std::vector<Neighbor> neighbors,
                   const TsiConfig& config) {
  config.Validate();
  if (!(input_pctr > 0.0 && input_pctr < 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "input pctr must lie in (0, 1)");
  }
  TsiResult result;
  result.input_pctr = input_pctr;
  result.neighbors = std::move(neighbors);

  std::vector<double> above;
  for (const auto& nb : result.neighbors) {
    if (nb.pctr > input_pctr) above.push_back(nb.pctr);
  }
  if (above.empty()) return result;
  std::sort(above.begin(), above.end());
  const size_t m = above.size();
  const double median =
      m % 2 == 1 ? above[m / 2] : (above[m / 2 - 1] + above[m / 2]) / 2.0;
  result.median_above = median;
  if ((median - input_pctr) / input_pctr <= config.delta) return result;

  result.tsi = 0;
  for (const auto& nb : result.neighbors) {
    const double lift = (nb.pctr - input_pctr) / input_pctr;
    if (lift > config.delta) result.suggestions.push_back({nb, lift, {}});
  }
  std::stable_sort(result.suggestions.begin(), result.suggestions.end(),
                   [](const Suggestion& a, const Suggestion& b) {
                     return a.neighbor.pctr > b.neighbor.pctr;
                   });
  return result;
}

std::vector<SweepPoint> RecommendationCurve(std::span<const ScoredAd> ads,
                                            std::span<const double> deltas,
                                            const TsiConfig& config) {
  if (!std::is_sorted(deltas.begin(), deltas.end())) {
    Fail(ErrorKind::kInvalidArgument, "deltas must be sorted ascending");
  }
  std::vector<SweepPoint> curve;
  for (double delta : deltas) {
    TsiConfig at = config;
    at.delta = delta;
    size_t weak = 0;
    for (const auto& ad : ads) {
      weak += ScoreTsi(ad.input_pctr, ad.neighbors, at).tsi == 0;
    }
    curve.push_back({delta, ads.empty() ? 0.0
                                        : static_cast<double>(weak) /
                                              static_cast<double>(ads.size())});
  }
  return curve;
}

std::vector<SweepPoint> DeltaSweep(std::span<const Ad> test_ads, const AdIndex& index,
                                   const PctrProvider& pctr,
                                   const EmbeddingProvider& embedder,
                                   std::span<const double> deltas,
                                   const TsiConfig& config) {
  config.Validate();
  std::vector<ScoredAd> scored;
  scored.reserve(test_ads.size());
  for (const Ad& ad : test_ads) {
    const AdText text = ad.Text();
    const Embedding query = embedder.Embed(text.full_text);
    scored.push_back({pctr.Predict(text, ad.publisher),
                      index.QueryApprox(query, {config.k, config.min_sim, ad.ad_id})});
  }
  return RecommendationCurve(scored, deltas, config);
}

std::string SweepToCsv(std::span<const SweepPoint> curve) {
  std::ostringstream out;
  out << "delta,recommendation_rate\n";
  char line[64];
  for (const auto& point : curve) {
    std::snprintf(line, sizeof(line), "%.6g,%.6f\n", point.delta, point.recommendation_rate);
    out << line;
  }
  return out.str();
}

nlohmann::json PrecisionTable::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t n = 0; n < notions.size(); ++n) {
    nlohmann::json row = {{"notion", SimilarityNotionName(notions[n])}};
    for (size_t i = 0; i < k_list.size(); ++i) {
      row["p@" + std::to_string(k_list[i])] = values[n][i];
    }
    rows.push_back(std::move(row));
  }
  return {{"queries", queries}, {"k", k_list}, {"rows", rows}};
}

PrecisionTable EvaluateStrategyTable(const AdPool& pool, const Split& split,
                                     const EmbeddingProvider& embedder,
                                     std::span<const SimilarityNotion> notions,
                                     std::span<const size_t> k_list,
                                     const RetrievalEvalOptions& options) {
  if (k_list.empty()) Fail(ErrorKind::kInvalidArgument, "k_list is empty");
  const size_t max_k = *std::max_element(k_list.begin(), k_list.end());
  const AdPool train = pool.Subset(split.train);
  const ConstantPctrProvider unused_pctr(0.5);
  const AdIndex index = AdIndex::Build(train, embedder, unused_pctr, options.index_params);

  PrecisionTable table;
  table.notions.assign(notions.begin(), notions.end());
  table.k_list.assign(k_list.begin(), k_list.end());
  table.values.assign(notions.size(), std::vector<double>(k_list.size(), 0.0));
  const QueryOptions query_options{max_k, -1.0, std::nullopt};
  for (const auto& id : split.test) {
    const Ad& query = pool.Get(id);
    const Embedding q = embedder.Embed(query.Text().full_text);
    const auto neighbors = options.approximate ? index.QueryApprox(q, query_options)
                                               : index.QueryExact(q, query_options);
    std::vector<const Ad*> retrieved;
    for (const auto& nb : neighbors) retrieved.push_back(&train.Get(nb.ad_id));
    for (size_t n = 0; n < notions.size(); ++n) {
      for (size_t i = 0; i < k_list.size(); ++i) {
        table.values[n][i] += ComputePrecisionAtK(query, retrieved, k_list[i], notions[n]).value;
      }
    }
    ++table.queries;
  }
  if (table.queries > 0) {
    for (auto& row : table.values) {
      for (double& v : row) v /= static_cast<double>(table.queries);
    }
  }
  return table;
}

}  // namespace adstrength
