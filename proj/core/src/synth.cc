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

#include "adstrength/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "adstrength/error.h"
#include "adstrength/random.h"

namespace adstrength {
namespace {

constexpr std::array<const char*, 20> kCategoryNames = {
    "automotive", "travel",     "gaming",    "finance",   "health",
    "fashion",    "food",       "technology", "education", "home",
    "sports",     "entertainment", "pets",   "beauty",    "real-estate",
    "business",   "family",     "science",   "hobbies",   "news"};

constexpr std::array<const char*, 16> kSyllables = {
    "ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi",
    "pe", "su", "da", "fe", "go", "hu", "ji", "bo"};

constexpr std::array<const char*, 12> kBrandSyllables = {
    "zor", "vex", "qua", "lin", "tri", "mak", "pol", "dex", "syl", "orb", "nyx", "rel"};

constexpr std::array<const char*, 20> kGenericWords = {
    "best",    "new",      "free",    "today",    "great",   "deals",   "save",
    "official", "online",  "top",     "offer",    "exclusive", "quality", "limited",
    "discover", "easy",    "fast",    "premium",  "trusted", "popular"};

constexpr std::array<const char*, 10> kCtas = {
    "Shop Now", "Learn More", "Sign Up",  "Play Now", "Get Offer",
    "Book Now", "Download",   "Apply Now", "Get Quote", "Watch Now"};

std::string TopicWord(size_t category, size_t index) {
  // The leading syllable pair is unique per category, so vocabularies are
  // disjoint across categories.
  std::string word = kSyllables[category % 16];
  word += kSyllables[(category / 16 + 3 * (index / 16)) % 16];
  word += kSyllables[index % 16];
  word += kSyllables[(index / 16 + category) % 16];
  return word;
}

std::string Capitalize(std::string word) {
  if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] -= 32;
  return word;
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

struct Adgroup {
  std::string id;
  std::vector<size_t> favored;  // topic word indices this product leans on
};

struct Campaign {
  std::string id;
  size_t category;
  std::vector<Adgroup> adgroups;
};

struct Advertiser {
  std::string id;
  std::string brand;
  double effect;
  std::vector<Campaign> campaigns;
};

}  // namespace

SynthCorpus GenerateCorpus(const SynthConfig& config) {
  if (config.categories == 0 || config.categories > kCategoryNames.size()) {
    Fail(ErrorKind::kInvalidArgument, "categories must be in [1, 20]");
  }
  if (config.advertisers == 0 || config.publishers == 0 || config.topic_words < 8 ||
      config.topic_words > 256) {
    Fail(ErrorKind::kInvalidArgument, "synthetic corpus configuration out of range");
  }
  Rng rng(config.seed);
  SynthCorpus corpus;
  for (size_t c = 0; c < config.categories; ++c) corpus.categories.push_back(kCategoryNames[c]);

  std::vector<std::vector<double>> token_effect(config.categories);
  for (auto& effects : token_effect) {
    for (size_t w = 0; w < config.topic_words; ++w) {
      effects.push_back(rng.Normal() * config.token_effect_sd);
    }
  }
  std::vector<double> publisher_effect;
  std::vector<double> publisher_weight;
  for (size_t p = 0; p < config.publishers; ++p) {
    publisher_effect.push_back(rng.Normal() * 0.3);
    publisher_weight.push_back(1.0 / static_cast<double>(p + 1));
  }
  std::vector<double> cta_effect;
  for (size_t i = 0; i < kCtas.size(); ++i) cta_effect.push_back(rng.Normal() * 0.2);

  std::set<std::string> used_brands;
  std::vector<Advertiser> advertisers;
  for (size_t a = 0; a < config.advertisers; ++a) {
    Advertiser adv;
    char id[32];
    std::snprintf(id, sizeof(id), "adv%04zu", a);
    adv.id = id;
    do {
      std::string brand;
      const size_t parts = 2 + rng.Below(2);
      for (size_t s = 0; s < parts; ++s) brand += kBrandSyllables[rng.Below(kBrandSyllables.size())];
      adv.brand = Capitalize(brand);
      if (used_brands.contains(adv.brand)) adv.brand += std::to_string(a);
    } while (used_brands.contains(adv.brand));
    used_brands.insert(adv.brand);
    adv.effect = rng.Normal() * config.advertiser_effect_sd;

    std::vector<size_t> categories = {a % config.categories};
    if (config.categories > 1 && rng.Bernoulli(0.3)) {
      categories.push_back((a + 1 + rng.Below(config.categories - 1)) % config.categories);
    }
    const size_t campaigns = 1 + rng.Below(3);
    for (size_t c = 0; c < campaigns; ++c) {
      Campaign campaign;
      campaign.id = adv.id + "-c" + std::to_string(c);
      campaign.category = categories[c % categories.size()];
      const size_t adgroups = 1 + rng.Below(3);
      for (size_t g = 0; g < adgroups; ++g) {
        Adgroup group;
        group.id = campaign.id + "-g" + std::to_string(g);
        for (int f = 0; f < 4; ++f) group.favored.push_back(rng.Below(config.topic_words));
        campaign.adgroups.push_back(std::move(group));
      }
      adv.campaigns.push_back(std::move(campaign));
    }
    corpus.brands.push_back(adv.brand);
    advertisers.push_back(std::move(adv));
  }

  double publisher_total = 0.0;
  for (double w : publisher_weight) publisher_total += w;
  const double base_logit = std::log(config.base_ctr / (1.0 - config.base_ctr));

  for (size_t i = 0; i < config.ads; ++i) {
    const Advertiser& adv = advertisers[rng.Below(advertisers.size())];
    const Campaign& campaign = adv.campaigns[rng.Below(adv.campaigns.size())];
    const Adgroup& group = campaign.adgroups[rng.Below(campaign.adgroups.size())];
    const size_t cat = campaign.category;

    double logit = base_logit + adv.effect;
    auto topic = [&]() {
      const size_t w = rng.Bernoulli(0.6) ? group.favored[rng.Below(group.favored.size())]
                                          : rng.Below(config.topic_words);
      logit += token_effect[cat][w];
      return TopicWord(cat, w);
    };
    std::vector<std::string> title = {adv.brand, Capitalize(topic()), topic()};
    std::vector<std::string> description;
    const size_t words = 3 + rng.Below(4);
    for (size_t w = 0; w < words; ++w) {
      description.push_back(rng.Bernoulli(0.7) ? topic()
                                               : kGenericWords[rng.Below(kGenericWords.size())]);
    }
    const size_t cta = rng.Below(kCtas.size());
    logit += cta_effect[cta];

    double pick = rng.Uniform() * publisher_total;
    size_t publisher = 0;
    while (publisher + 1 < config.publishers && pick >= publisher_weight[publisher]) {
      pick -= publisher_weight[publisher];
      ++publisher;
    }
    logit += publisher_effect[publisher];

    Ad ad;
    char id[32];
    std::snprintf(id, sizeof(id), "ad%06zu", i);
    ad.ad_id = id;
    ad.advertiser_id = adv.id;
    ad.campaign_id = campaign.id;
    ad.adgroup_id = group.id;
    ad.category = corpus.categories[cat];
    ad.title = Join(title);
    ad.description = Capitalize(Join(description));
    ad.cta = kCtas[cta];
    std::snprintf(id, sizeof(id), "pub%02zu", publisher);
    ad.publisher = id;
    if (rng.Bernoulli(config.zero_impression_rate)) {
      ad.impressions = 0;
      ad.clicks = 0;
    } else {
      ad.impressions =
          static_cast<int64_t>(std::floor(std::exp(std::log(200.0) + rng.Uniform() * std::log(25.0))));
      const double ctr = 1.0 / (1.0 + std::exp(-logit));
      // Binomial draw; impressions are small enough for direct sampling.
      int64_t clicks = 0;
      for (int64_t t = 0; t < ad.impressions; ++t) clicks += rng.Bernoulli(ctr);
      ad.clicks = clicks;
    }
    corpus.ads.push_back(std::move(ad));
  }
  return corpus;
}

}  // namespace adstrength
