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

#include "doctest.h"

#include "adstrength/error.h"
#include "adstrength/metrics.h"
#include "adstrength/random.h"
#include "oracles.h"
#include "support.h"

using namespace adstrength;

namespace {

EvalRecord Rec(const std::string& id, double pctr, int64_t clicks, int64_t imp) {
  return {id, pctr, static_cast<double>(clicks) / imp, clicks, imp};
}

// Random records with deliberately repeated scores.
std::vector<EvalRecord> RandomRecords(Rng& rng, size_t n) {
  std::vector<EvalRecord> out;
  for (size_t i = 0; i < n; ++i) {
    const int64_t imp = 1 + static_cast<int64_t>(rng.Below(50));
    const int64_t clicks = static_cast<int64_t>(rng.Below(static_cast<uint64_t>(imp) + 1));
    const double pctr = static_cast<double>(1 + rng.Below(8)) / 10.0;
    out.push_back(Rec("a" + std::to_string(i), pctr, clicks, imp));
  }
  return out;
}

std::vector<oracle::AdCounts> ToCounts(const std::vector<EvalRecord>& records) {
  std::vector<oracle::AdCounts> out;
  for (const auto& r : records) out.push_back({r.pctr, r.true_ctr, r.clicks, r.impressions});
  return out;
}

bool HasBothClasses(const std::vector<EvalRecord>& records) {
  int64_t pos = 0, neg = 0;
  for (const auto& r : records) {
    pos += r.clicks;
    neg += r.impressions - r.clicks;
  }
  return pos > 0 && neg > 0;
}

std::vector<double> TiedValues(Rng& rng, size_t n, uint64_t levels) {
  std::vector<double> v;
  for (size_t i = 0; i < n; ++i) v.push_back(static_cast<double>(rng.Below(levels)));
  return v;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("auc examples") {
  std::vector<EvalRecord> perfect = {Rec("a", 0.9, 10, 10), Rec("b", 0.1, 0, 10)};
  CHECK(WeightedAuc(perfect, ScoreField::kPctr) == 1.0);
  std::vector<EvalRecord> flat = {Rec("a", 0.3, 3, 10), Rec("b", 0.3, 1, 10), Rec("c", 0.3, 0, 5)};
  CHECK(WeightedAuc(flat, ScoreField::kPctr) == 0.5);
}

TEST_CASE("auc rejects degenerate class mass") {
  std::vector<EvalRecord> no_clicks = {Rec("a", 0.2, 0, 10), Rec("b", 0.1, 0, 4)};
  CHECK_THROWS_AS(WeightedAuc(no_clicks, ScoreField::kPctr), Error);
  std::vector<EvalRecord> all_clicks = {Rec("a", 0.2, 10, 10)};
  CHECK_THROWS_AS(WeightedAuc(all_clicks, ScoreField::kPctr), Error);
}

TEST_CASE("auc equals the pair-enumeration oracle") {
  Rng rng(101);
  int checked = 0;
  while (checked < 300) {
    const auto records = RandomRecords(rng, 2 + rng.Below(49));
    if (!HasBothClasses(records)) continue;
    const auto counts = ToCounts(records);
    CHECK(std::abs(WeightedAuc(records, ScoreField::kPctr) - oracle::PairwiseAuc(counts, false)) <
          1e-12);
    CHECK(std::abs(WeightedAuc(records, ScoreField::kTrueCtr) - oracle::PairwiseAuc(counts, true)) <
          1e-12);
    ++checked;
  }
}

TEST_CASE("relative auc") {
  SUBCASE("true ctr scoring gives ratio one") {
    std::vector<EvalRecord> r = {Rec("a", 0.3, 30, 100), Rec("b", 0.1, 10, 100)};
    for (auto& x : r) x.pctr = x.true_ctr;
    const auto rel = ComputeRelativeAuc(r);
    CHECK(rel.ratio == 1.0);
  }
  SUBCASE("hand-computed upper bound below one") {
    // Clicks vs non-clicks: A+ beats B- (30*90), A+ ties A- (30*70/2),
    // B+ ties B- (10*90/2), B+ loses to A-. Total mass 40*160.
    std::vector<EvalRecord> r = {Rec("a", 0.5, 30, 100), Rec("b", 0.5, 10, 100)};
    const auto rel = ComputeRelativeAuc(r);
    CHECK(rel.upper_bound == doctest::Approx(4200.0 / 6400.0).epsilon(1e-15));
    CHECK(rel.auc == 0.5);
    CHECK(rel.ratio == doctest::Approx(0.5 / (4200.0 / 6400.0)));
  }
  SUBCASE("monotone transforms leave auc unchanged") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      auto records = RandomRecords(rng, 30);
      if (!HasBothClasses(records)) continue;
      for (auto& x : records) x.pctr = rng.Uniform() * 0.9 + 0.05;
      const auto base = ComputeRelativeAuc(records);
      auto squared = records;
      for (auto& x : squared) x.pctr = x.pctr * x.pctr;
      auto logit = records;
      for (auto& x : logit) x.pctr = std::log(x.pctr / (1 - x.pctr));
      CHECK(ComputeRelativeAuc(squared).auc == base.auc);
      CHECK(ComputeRelativeAuc(squared).ratio == base.ratio);
      CHECK(ComputeRelativeAuc(logit).auc == base.auc);
    }
  }
}

TEST_CASE("kendall tau-b") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> rev = {5, 4, 3, 2, 1};
  CHECK(KendallTauB(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(KendallTauB(x, rev) == doctest::Approx(-1.0).epsilon(1e-15));
  std::vector<double> a = {1, 2, 2, 3}, b = {1, 2, 3, 3};
  // Pairs: (12)C (13)C (14)C (23)tx (24)C (34)ty -> P=4, Q=0, T=1, U=1.
  CHECK(KendallTauB(a, b) == doctest::Approx(4.0 / 5.0).epsilon(1e-15));
  CHECK(std::abs(KendallTauB(a, b) - oracle::TauB(a, b)) < 1e-12);
  std::vector<double> flat = {2, 2, 2};
  CHECK_THROWS_AS(KendallTauB(flat, std::vector<double>{1, 2, 3}), Error);
  CHECK_THROWS_AS(KendallTauB(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST_CASE("tau-b and spearman equal oracles on tie-laden instances") {
  Rng rng(202);
  int checked = 0;
  while (checked < 300) {
    const size_t n = 2 + rng.Below(49);
    const auto x = TiedValues(rng, n, 1 + rng.Below(6));
    const auto y = TiedValues(rng, n, 1 + rng.Below(6));
    const bool x_const = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const bool y_const = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (x_const || y_const) {
      CHECK_THROWS_AS(KendallTauB(x, y), Error);
      CHECK_THROWS_AS(Spearman(x, y), Error);
      continue;
    }
    CHECK(std::abs(KendallTauB(x, y) - oracle::TauB(x, y)) < 1e-12);
    CHECK(std::abs(Spearman(x, y) - oracle::SpearmanByCounting(x, y)) < 1e-12);
    ++checked;
  }
}

TEST_CASE("spearman examples and ranks") {
  std::vector<double> x = {0.1, 0.5, 0.3, 0.9};
  std::vector<double> down = {4, 1, 3, 0};
  CHECK(Spearman(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Spearman(x, down) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(AverageRanks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("precision at k") {
  using testing::MakeAd;
  const Ad q = MakeAd("q", "adv1", "c1", "g1", "travel", "q");
  const Ad same_group = MakeAd("a", "adv1", "c1", "g1", "travel", "a");
  const Ad same_campaign = MakeAd("b", "adv1", "c1", "g2", "travel", "b");
  const Ad same_adv = MakeAd("c", "adv1", "c2", "g3", "travel", "c");
  const Ad other = MakeAd("d", "adv2", "c9", "g9", "games", "d");
  std::vector<const Ad*> list = {&same_group, &same_campaign, &same_adv, &other};
  CHECK(ComputePrecisionAtK(q, list, 4, SimilarityNotion::kAdgroup).value == 0.25);
  CHECK(ComputePrecisionAtK(q, list, 4, SimilarityNotion::kCampaign).value == 0.5);
  CHECK(ComputePrecisionAtK(q, list, 4, SimilarityNotion::kAdvertiser).value == 0.75);
  CHECK(ComputePrecisionAtK(q, list, 3, SimilarityNotion::kCategory).value == 1.0);
  std::vector<const Ad*> miss = {&other};
  CHECK(ComputePrecisionAtK(q, miss, 1, SimilarityNotion::kCategory).value == 0.0);
  const auto short_list = ComputePrecisionAtK(q, miss, 5, SimilarityNotion::kCategory);
  CHECK(short_list.short_list);
  CHECK(short_list.considered == 1);
  std::vector<const Ad*> with_self = {&q};
  CHECK_THROWS_AS(ComputePrecisionAtK(q, with_self, 1, SimilarityNotion::kCategory), Error);
}

TEST_CASE("hierarchy notions nest") {
  Rng rng(9);
  using testing::MakeAd;
  std::vector<Ad> ads;
  for (int i = 0; i < 60; ++i) {
    const int adv = static_cast<int>(rng.Below(3));
    const int camp = adv * 10 + static_cast<int>(rng.Below(2));
    const int grp = camp * 10 + static_cast<int>(rng.Below(2));
    ads.push_back(MakeAd("x" + std::to_string(i), "adv" + std::to_string(adv),
                         "c" + std::to_string(camp), "g" + std::to_string(grp), "cat", "t"));
  }
  for (size_t qi = 0; qi < ads.size(); ++qi) {
    std::vector<const Ad*> list;
    for (size_t j = 0; j < ads.size() && list.size() < 10; ++j) {
      if (j != qi) list.push_back(&ads[j]);
    }
    const double g = ComputePrecisionAtK(ads[qi], list, 10, SimilarityNotion::kAdgroup).value;
    const double c = ComputePrecisionAtK(ads[qi], list, 10, SimilarityNotion::kCampaign).value;
    const double a = ComputePrecisionAtK(ads[qi], list, 10, SimilarityNotion::kAdvertiser).value;
    CHECK(g <= c);
    CHECK(c <= a);
  }
}

}  // TEST_SUITE
