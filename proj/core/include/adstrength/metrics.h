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

#ifndef ADSTRENGTH_METRICS_H_
#define ADSTRENGTH_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adstrength/corpus.h"
#include "json.hpp"

namespace adstrength {

struct EvalRecord {
  std::string ad_id;
  double pctr = 0.0;
  double true_ctr = 0.0;
  int64_t clicks = 0;
  int64_t impressions = 0;
};

// Builds a record from an ad with impressions > 0.
EvalRecord MakeEvalRecord(const Ad& ad, double pctr);

enum class ScoreField { kPctr, kTrueCtr };

// Impression-weighted AUC: every click is a positive sample and every
// non-clicked impression a negative one, all sharing their ad's score. Ties
// contribute one half. Sort-and-sweep, O(n log n).
double WeightedAuc(std::span<const EvalRecord> records, ScoreField field);

struct RelativeAuc {
  double auc = 0.0;
  double upper_bound = 0.0;
  double ratio = 0.0;
};

// upper_bound scores every ad by its observed CTR.
RelativeAuc ComputeRelativeAuc(std::span<const EvalRecord> records);

// Kendall tau-b: (P - Q) / sqrt((n0 - T)(n0 - U)) where T and U count pairs
// tied in x and in y (a pair tied in both counts in both). O(n log n).
double KendallTauB(std::span<const double> x, std::span<const double> y);

// Pearson correlation of mid-ranks.
double Spearman(std::span<const double> x, std::span<const double> y);

// 1-based mid-ranks (ties share their mean rank).
std::vector<double> AverageRanks(std::span<const double> values);

struct CtrReport {
  double auc = 0.0;
  double upper_bound = 0.0;
  double relative_auc = 0.0;
  double ktc = 0.0;
  double srcc = 0.0;
  size_t ads = 0;

  nlohmann::json ToJson() const;
};

// AUC metrics plus rank agreement between pctr and true CTR across ads.
CtrReport EvaluateCtr(std::span<const EvalRecord> records);

enum class SimilarityNotion { kAdgroup, kCampaign, kAdvertiser, kCategory };

std::string_view SimilarityNotionName(SimilarityNotion notion);
SimilarityNotion ParseSimilarityNotion(std::string_view name);
bool SameUnder(const Ad& a, const Ad& b, SimilarityNotion notion);

struct PrecisionAtK {
  double value = 0.0;
  size_t considered = 0;
  // Fewer than k ads were retrieved; value is over what was available.
  bool short_list = false;
};

PrecisionAtK ComputePrecisionAtK(const Ad& query,
                                 std::span<const Ad* const> retrieved, size_t k,
                                 SimilarityNotion notion);

}  // namespace adstrength

#endif  // ADSTRENGTH_METRICS_H_
