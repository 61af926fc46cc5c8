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

#include "adstrength/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adstrength/error.h"

namespace adstrength {

EvalRecord MakeEvalRecord(const Ad& ad, double pctr) {
  if (ad.impressions <= 0) {
    Fail(ErrorKind::kInvalidArgument, "ad '" + ad.ad_id + "' has no impressions");
  }
  return {ad.ad_id, pctr, ad.Ctr(), ad.clicks, ad.impressions};
}

double WeightedAuc(std::span<const EvalRecord> records, ScoreField field) {
  struct Point {
    double score;
    double positive;
    double negative;
  };
  std::vector<Point> points;
  points.reserve(records.size());
  double total_positive = 0.0;
  double total_negative = 0.0;
  for (const auto& r : records) {
    if (r.impressions <= 0 || r.clicks < 0 || r.clicks > r.impressions) {
      Fail(ErrorKind::kInvalidArgument, "invalid eval record '" + r.ad_id + "'");
    }
    const double score = field == ScoreField::kPctr ? r.pctr : r.true_ctr;
    const double positive = static_cast<double>(r.clicks);
    const double negative = static_cast<double>(r.impressions - r.clicks);
    points.push_back({score, positive, negative});
    total_positive += positive;
    total_negative += negative;
  }
  if (!(total_positive > 0) || !(total_negative > 0)) {
    Fail(ErrorKind::kFailedPrecondition,
         "AUC needs both click and non-click impressions");
  }
  std::sort(points.begin(), points.end(),
            [](const Point& a, const Point& b) { return a.score < b.score; });
  double negative_below = 0.0;
  double wins = 0.0;
  for (size_t i = 0; i < points.size();) {
    size_t j = i;
    double group_positive = 0.0;
    double group_negative = 0.0;
    while (j < points.size() && points[j].score == points[i].score) {
      group_positive += points[j].positive;
      group_negative += points[j].negative;
      ++j;
    }
    wins += group_positive * negative_below + 0.5 * group_positive * group_negative;
    negative_below += group_negative;
    i = j;
  }
  return wins / (total_positive * total_negative);
}

RelativeAuc ComputeRelativeAuc(std::span<const EvalRecord> records) {
  RelativeAuc result;
  result.auc = WeightedAuc(records, ScoreField::kPctr);
  result.upper_bound = WeightedAuc(records, ScoreField::kTrueCtr);
  result.ratio = result.auc / result.upper_bound;
  return result;
}

namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    Fail(ErrorKind::kInvalidArgument, "rank vectors differ in length");
  }
  if (x.size() < 2) Fail(ErrorKind::kInvalidArgument, "rank vectors need n >= 2");
}

// Sum over runs of equal adjacent values of t(t-1)/2; `equal` compares the
// current element with the previous one.
template <typename Equal>
int64_t TiedPairs(size_t n, Equal equal) {
  int64_t ties = 0;
  int64_t run = 1;
  for (size_t i = 1; i < n; ++i) {
    if (equal(i)) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties + run * (run - 1) / 2;
}

// Stable merge sort of `values` counting inversions (pairs i < j with
// values[i] > values[j]).
int64_t MergeSortSwaps(std::vector<double>& values, std::vector<double>& scratch,
                       size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  int64_t swaps = MergeSortSwaps(values, scratch, lo, mid) +
                  MergeSortSwaps(values, scratch, mid, hi);
  size_t i = lo;
  size_t j = mid;
  size_t out = lo;
  while (i < mid && j < hi) {
    if (values[j] < values[i]) {
      swaps += static_cast<int64_t>(mid - i);
      scratch[out++] = values[j++];
    } else {
      scratch[out++] = values[i++];
    }
  }
  while (i < mid) scratch[out++] = values[i++];
  while (j < hi) scratch[out++] = values[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, values.begin() + lo);
  return swaps;
}

}  // namespace

double KendallTauB(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

  const int64_t pairs = static_cast<int64_t>(n) * static_cast<int64_t>(n - 1) / 2;
  const int64_t tied_x =
      TiedPairs(n, [&](size_t i) { return x[order[i]] == x[order[i - 1]]; });
  const int64_t tied_xy = TiedPairs(n, [&](size_t i) {
    return x[order[i]] == x[order[i - 1]] && ys[i] == ys[i - 1];
  });
  std::vector<double> scratch(n);
  const int64_t discordant = MergeSortSwaps(ys, scratch, 0, n);
  const int64_t tied_y = TiedPairs(n, [&](size_t i) { return ys[i] == ys[i - 1]; });

  if (tied_x == pairs || tied_y == pairs) {
    Fail(ErrorKind::kFailedPrecondition, "tau-b undefined: one side is all ties");
  }
  // P - Q = (pairs untied in both) - 2Q.
  const int64_t untied = pairs - tied_x - tied_y + tied_xy;
  const int64_t numerator = untied - 2 * discordant;
  return static_cast<double>(numerator) /
         std::sqrt(static_cast<double>(pairs - tied_x) *
                   static_cast<double>(pairs - tied_y));
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t t = i; t < j; ++t) ranks[order[t]] = mean_rank;
    i = j;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    Fail(ErrorKind::kFailedPrecondition, "spearman undefined: zero rank variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

nlohmann::json CtrReport::ToJson() const {
  return {{"auc", auc},   {"upper_bound_auc", upper_bound},
          {"relative_auc", relative_auc},
          {"ktc", ktc},   {"srcc", srcc},
          {"ads", ads}};
}

CtrReport EvaluateCtr(std::span<const EvalRecord> records) {
  CtrReport report;
  const auto relative = ComputeRelativeAuc(records);
  report.auc = relative.auc;
  report.upper_bound = relative.upper_bound;
  report.relative_auc = relative.ratio;
  std::vector<double> predicted;
  std::vector<double> observed;
  for (const auto& r : records) {
    predicted.push_back(r.pctr);
    observed.push_back(r.true_ctr);
  }
  report.ktc = KendallTauB(predicted, observed);
  report.srcc = Spearman(predicted, observed);
  report.ads = records.size();
  return report;
}

std::string_view SimilarityNotionName(SimilarityNotion notion) {
  switch (notion) {
    case SimilarityNotion::kAdgroup: return "adgroup";
    case SimilarityNotion::kCampaign: return "campaign";
    case SimilarityNotion::kAdvertiser: return "advertiser";
    case SimilarityNotion::kCategory: return "category";
  }
  return "";
}

SimilarityNotion ParseSimilarityNotion(std::string_view name) {
  for (auto notion : {SimilarityNotion::kAdgroup, SimilarityNotion::kCampaign,
                      SimilarityNotion::kAdvertiser, SimilarityNotion::kCategory}) {
    if (SimilarityNotionName(notion) == name) return notion;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown similarity notion '" + std::string(name) + "'");
}

bool SameUnder(const Ad& a, const Ad& b, SimilarityNotion notion) {
  switch (notion) {
    case SimilarityNotion::kAdgroup: return a.adgroup_id == b.adgroup_id;
    case SimilarityNotion::kCampaign: return a.campaign_id == b.campaign_id;
    case SimilarityNotion::kAdvertiser: return a.advertiser_id == b.advertiser_id;
    case SimilarityNotion::kCategory: return a.category == b.category;
  }
  return false;
}

PrecisionAtK ComputePrecisionAtK(const Ad& query,
                                 std::span<const Ad* const> retrieved, size_t k,
                                 SimilarityNotion notion) {
  if (k == 0) Fail(ErrorKind::kInvalidArgument, "precision@k needs k >= 1");
  PrecisionAtK result;
  result.considered = std::min(k, retrieved.size());
  result.short_list = retrieved.size() < k;
  size_t hits = 0;
  for (size_t i = 0; i < result.considered; ++i) {
    if (retrieved[i]->ad_id == query.ad_id) {
      Fail(ErrorKind::kInvalidArgument, "query ad appears in its own retrieval list");
    }
    if (SameUnder(query, *retrieved[i], notion)) ++hits;
  }
  result.value = result.considered == 0
                     ? 0.0
                     : static_cast<double>(hits) / static_cast<double>(result.considered);
  return result;
}

}  // namespace adstrength
