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

#ifndef ADSTRENGTH_TSICORE_H_
#define ADSTRENGTH_TSICORE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adstrength/annindex.h"
#include "adstrength/corpus.h"
#include "adstrength/ctrmodel.h"
#include "adstrength/embed.h"
#include "adstrength/metrics.h"

namespace adstrength {

struct TsiConfig {
  size_t k = kDefaultNeighbors;
  double delta = 0.30;
  double min_sim = kDefaultMinSimilarity;

  void Validate() const;
};

struct Suggestion {
  Neighbor neighbor;
  double lift = 0.0;     // (pctr - input) / input
  std::string text;      // anonymized text, filled in by the caller
};

struct TsiResult {
  int tsi = 1;
  double input_pctr = 0.0;
  std::vector<Neighbor> neighbors;
  std::vector<Suggestion> suggestions;
  // Median pCTR of neighbors strictly above the input, when any exist.
  std::optional<double> median_above;
};

// Strength rule: A = neighbor pCTRs strictly above the input. The ad is weak
// (tsi = 0) when (median(A) - input) / input > delta; suggestions are then
// the neighbors whose own relative lift exceeds delta, by pCTR descending.
TsiResult ScoreTsi(double input_pctr, std::vector<Neighbor> neighbors,
                   const TsiConfig& config);

// One scored test ad: its pCTR and retrieved neighbors.
struct ScoredAd {
  double input_pctr = 0.0;
  std::vector<Neighbor> neighbors;
};

struct SweepPoint {
  double delta = 0.0;
  double recommendation_rate = 0.0;
};

// Fraction of ads with tsi = 0 at each delta (deltas ascending).
std::vector<SweepPoint> RecommendationCurve(std::span<const ScoredAd> ads,
                                            std::span<const double> deltas,
                                            const TsiConfig& config);

// Scores each test ad against the train-pool index at config.min_sim.
std::vector<SweepPoint> DeltaSweep(std::span<const Ad> test_ads, const AdIndex& index,
                                   const PctrProvider& pctr,
                                   const EmbeddingProvider& embedder,
                                   std::span<const double> deltas,
                                   const TsiConfig& config);

std::string SweepToCsv(std::span<const SweepPoint> curve);

struct PrecisionTable {
  std::vector<SimilarityNotion> notions;
  std::vector<size_t> k_list;
  // values[notion][k] = mean precision@k over test ads.
  std::vector<std::vector<double>> values;
  size_t queries = 0;

  nlohmann::json ToJson() const;
};

struct RetrievalEvalOptions {
  bool approximate = false;
  IndexParams index_params;
};

// Indexes the train partition, retrieves the top max(k_list) train ads for
// each test ad (no similarity floor) and averages precision@k per notion.
PrecisionTable EvaluateStrategyTable(const AdPool& pool, const Split& split,
                                     const EmbeddingProvider& embedder,
                                     std::span<const SimilarityNotion> notions,
                                     std::span<const size_t> k_list,
                                     const RetrievalEvalOptions& options = {});

}  // namespace adstrength

#endif  // ADSTRENGTH_TSICORE_H_
