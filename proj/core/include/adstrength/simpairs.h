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

#ifndef ADSTRENGTH_SIMPAIRS_H_
#define ADSTRENGTH_SIMPAIRS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adstrength/corpus.h"
#include "adstrength/embed.h"

namespace adstrength {

// Which hierarchy level must match (together with category) for a positive.
enum class PairStrategy { kAdvertiserCat, kCampaignCat, kAdgroupCat };

std::string_view PairStrategyName(PairStrategy strategy);
PairStrategy ParsePairStrategy(std::string_view name);

enum class PairLabel { kUnlabeled = 0, kPositive = 1, kNegative = -1 };

// Positive: same group id at the strategy's level and same category.
// Negative (every strategy): different advertiser and different category.
// Anything else is unlabeled.
PairLabel LabelPair(const Ad& a, const Ad& b, PairStrategy strategy);

struct LabeledPair {
  std::string ad_id_a;  // ad_id_a < ad_id_b
  std::string ad_id_b;
  int label = 0;        // +1 or -1
  PairStrategy strategy = PairStrategy::kAdvertiserCat;

  bool operator==(const LabeledPair&) const = default;
};

struct PairSet {
  std::vector<LabeledPair> pairs;
  size_t neg_ratio = 30;
  uint64_t seed = 0;

  size_t positives() const;
  size_t negatives() const;
};

struct PairOptions {
  PairStrategy strategy = PairStrategy::kAdvertiserCat;
  size_t neg_ratio = 30;
  uint64_t seed = 0;
  size_t positive_cap_per_bucket = 1000;
};

// All positive pairs per (group, category) bucket (a seeded sample when a
// bucket exceeds the cap), then negatives sampled without replacement until
// negatives = min(available, positives * neg_ratio).
PairSet GeneratePairs(const AdPool& pool, const PairOptions& options);

// Number of unordered pairs with different advertiser and different category.
uint64_t CountNegativeEligible(const AdPool& pool);

struct PairLoss {
  double mean = 0.0;
  std::vector<double> per_pair;
};

// Mean of (cos(phi(a), phi(b)) - label)^2.
PairLoss CosineMseLoss(const PairSet& pairs,
                       const std::unordered_map<std::string, Embedding>& embeddings);
PairLoss CosineMseLoss(const PairSet& pairs, const AdPool& pool,
                       const EmbeddingProvider& embedder);

struct TextPair {
  std::string text_a;
  std::string text_b;
  int label = 0;

  bool operator==(const TextPair&) const = default;
};

PairLoss CosineMseLoss(std::span<const TextPair> pairs, const EmbeddingProvider& embedder);

// JSON Lines {"text_a", "text_b", "label"} in pair order.
std::vector<TextPair> ToTextPairs(const PairSet& pairs, const AdPool& pool);
void ExportPairs(const PairSet& pairs, const AdPool& pool, const std::filesystem::path& path);
std::vector<TextPair> ImportPairs(const std::filesystem::path& path);

}  // namespace adstrength

#endif  // ADSTRENGTH_SIMPAIRS_H_
