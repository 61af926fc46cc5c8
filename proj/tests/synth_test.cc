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

#include <map>
#include <set>

#include "doctest.h"

#include "adstrength/pipeline.h"
#include "adstrength/synth.h"

using namespace adstrength;

TEST_SUITE("synth") {

TEST_CASE("corpus shape and determinism") {
  SynthConfig config;
  config.ads = 600;
  config.advertisers = 40;
  config.categories = 4;
  const SynthCorpus a = GenerateCorpus(config);
  const SynthCorpus b = GenerateCorpus(config);
  CHECK(a.ads == b.ads);
  CHECK(a.ads.size() == 600);
  CHECK(a.brands.size() == 40);
  CHECK(a.categories.size() == 4);
  config.seed = 2;
  CHECK(GenerateCorpus(config).ads != a.ads);

  // The pool validator accepts it: ids unique, hierarchy nested, clicks bounded.
  const AdPool pool = AdPool::Create(a.ads, 13);
  CHECK(pool.size() == 600);
  std::set<std::string> cats;
  for (const auto& ad : pool.ads()) {
    cats.insert(ad.category);
    CHECK(ad.clicks <= ad.impressions);
    CHECK(ad.impressions >= 200);
    CHECK(ad.campaign_id.rfind(ad.advertiser_id, 0) == 0);
    CHECK(ad.adgroup_id.rfind(ad.campaign_id, 0) == 0);
  }
  CHECK(cats.size() == 4);
}

TEST_CASE("category vocabularies are disjoint") {
  SynthConfig config;
  config.ads = 400;
  config.advertisers = 30;
  config.categories = 3;
  const SynthCorpus corpus = GenerateCorpus(config);
  // Words shared across categories are exactly the generic filler words.
  const std::set<std::string> generic = {
      "best", "new", "free", "today", "great", "deals", "save", "official", "online", "top",
      "offer", "exclusive", "quality", "limited", "discover", "easy", "fast", "premium",
      "trusted", "popular"};
  std::map<std::string, std::set<std::string>> words;
  for (const auto& ad : corpus.ads) {
    for (const auto& t : Tokenize(ad.description)) words[ad.category].insert(t);
  }
  size_t shared = 0;
  for (const auto& [c1, w1] : words) {
    for (const auto& [c2, w2] : words) {
      if (c1 >= c2) continue;
      for (const auto& w : w1) {
        if (!w2.count(w)) continue;
        ++shared;
        CHECK(generic.count(w) == 1);
      }
    }
  }
  CHECK(shared > 0);
}

TEST_CASE("zero impression rate") {
  SynthConfig config;
  config.ads = 500;
  config.advertisers = 20;
  config.zero_impression_rate = 0.2;
  size_t zero = 0;
  for (const auto& ad : GenerateCorpus(config).ads) zero += ad.impressions == 0;
  CHECK(zero > 50);
  CHECK(zero < 150);
}

TEST_CASE("ctr experiment runs end to end") {
  SynthConfig config;
  config.ads = 1500;
  config.advertisers = 60;
  const AdPool pool = AdPool::Create(GenerateCorpus(config).ads, 13);
  const Split split = MakeSplit(pool, {}, SplitMode::kWarm, 1);
  TrainConfig train;
  train.epochs = 200;
  const CtrRun run = RunCtrExperiment(pool, split, ModelVariant::kNblr, train, 2, 13);
  CHECK(run.model->publishers().whitelist().size() == 13);
  CHECK(run.test.ads > 0);
  CHECK(run.test.auc > 0.6);
  CHECK(run.test.relative_auc <= 1.0 + 1e-12);
  const auto records = ScoreAds(pool, split.test, *run.model);
  CHECK(records.size() == run.test.ads);
}

}  // TEST_SUITE
