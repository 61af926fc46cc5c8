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

#include "adstrength/simpairs.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_set>

#include "adstrength/error.h"
#include "adstrength/random.h"

namespace adstrength {
namespace {

const std::string& GroupOf(const Ad& ad, PairStrategy strategy) {
  switch (strategy) {
    case PairStrategy::kAdvertiserCat: return ad.advertiser_id;
    case PairStrategy::kCampaignCat: return ad.campaign_id;
    case PairStrategy::kAdgroupCat: return ad.adgroup_id;
  }
  return ad.advertiser_id;
}

LabeledPair MakePair(const Ad& a, const Ad& b, int label, PairStrategy strategy) {
  if (b.ad_id < a.ad_id) return {b.ad_id, a.ad_id, label, strategy};
  return {a.ad_id, b.ad_id, label, strategy};
}

uint64_t Choose2(uint64_t m) { return m * (m - 1) / 2; }

// Floyd's sampling of `count` distinct values from [0, range), sorted.
std::vector<uint64_t> SampleDistinct(uint64_t range, size_t count, Rng& rng) {
  std::unordered_set<uint64_t> chosen;
  std::vector<uint64_t> out;
  for (uint64_t j = range - count; j < range; ++j) {
    const uint64_t t = rng.Below(j + 1);
    const uint64_t pick = chosen.contains(t) ? j : t;
    chosen.insert(pick);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view PairStrategyName(PairStrategy strategy) {
  switch (strategy) {
    case PairStrategy::kAdvertiserCat: return "advertiser-cat";
    case PairStrategy::kCampaignCat: return "campaign-cat";
    case PairStrategy::kAdgroupCat: return "adgroup-cat";
  }
  return "";
}

PairStrategy ParsePairStrategy(std::string_view name) {
  for (auto s : {PairStrategy::kAdvertiserCat, PairStrategy::kCampaignCat,
                 PairStrategy::kAdgroupCat}) {
    if (PairStrategyName(s) == name) return s;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown pair strategy '" + std::string(name) + "'");
}

PairLabel LabelPair(const Ad& a, const Ad& b, PairStrategy strategy) {
  const bool same_category = a.category == b.category;
  if (same_category && GroupOf(a, strategy) == GroupOf(b, strategy)) {
    return PairLabel::kPositive;
  }
  if (!same_category && a.advertiser_id != b.advertiser_id) return PairLabel::kNegative;
  return PairLabel::kUnlabeled;
}

size_t PairSet::positives() const {
  return static_cast<size_t>(std::count_if(pairs.begin(), pairs.end(),
                                           [](const LabeledPair& p) { return p.label == 1; }));
}

size_t PairSet::negatives() const { return pairs.size() - positives(); }

uint64_t CountNegativeEligible(const AdPool& pool) {
  std::map<std::string, uint64_t> by_advertiser;
  std::map<std::string, uint64_t> by_category;
  std::map<std::pair<std::string, std::string>, uint64_t> by_both;
  for (const Ad& ad : pool.ads()) {
    ++by_advertiser[ad.advertiser_id];
    ++by_category[ad.category];
    ++by_both[{ad.advertiser_id, ad.category}];
  }
  uint64_t same_advertiser = 0;
  uint64_t same_category = 0;
  uint64_t same_both = 0;
  for (const auto& [k, m] : by_advertiser) same_advertiser += Choose2(m);
  for (const auto& [k, m] : by_category) same_category += Choose2(m);
  for (const auto& [k, m] : by_both) same_both += Choose2(m);
  return Choose2(pool.size()) - same_advertiser - same_category + same_both;
}

PairSet GeneratePairs(const AdPool& pool, const PairOptions& options) {
  if (pool.size() < 2) Fail(ErrorKind::kInvalidArgument, "pair generation needs >= 2 ads");
  const auto& ads = pool.ads();
  Rng rng(options.seed);
  PairSet set;
  set.neg_ratio = options.neg_ratio;
  set.seed = options.seed;

  std::map<std::pair<std::string, std::string>, std::vector<size_t>> buckets;
  for (size_t i = 0; i < ads.size(); ++i) {
    buckets[{GroupOf(ads[i], options.strategy), ads[i].category}].push_back(i);
  }
  for (const auto& [key, rows] : buckets) {
    const uint64_t m = rows.size();
    const uint64_t total = Choose2(m);
    if (total == 0) continue;
    if (total <= options.positive_cap_per_bucket) {
      for (size_t i = 0; i < m; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
          set.pairs.push_back(MakePair(ads[rows[i]], ads[rows[j]], 1, options.strategy));
        }
      }
      continue;
    }
    const auto picks = SampleDistinct(total, options.positive_cap_per_bucket, rng);
    uint64_t row_start = 0;  // pair index of (i, i + 1)
    size_t i = 0;
    for (uint64_t pick : picks) {
      while (pick >= row_start + (m - 1 - i)) {
        row_start += m - 1 - i;
        ++i;
      }
      const size_t j = i + 1 + static_cast<size_t>(pick - row_start);
      set.pairs.push_back(MakePair(ads[rows[i]], ads[rows[j]], 1, options.strategy));
    }
  }
  if (set.pairs.empty()) {
    Fail(ErrorKind::kFailedPrecondition,
         std::string("no positive pairs available under ") +
             std::string(PairStrategyName(options.strategy)));
  }

  const uint64_t available = CountNegativeEligible(pool);
  const uint64_t target = std::min<uint64_t>(available, set.pairs.size() * options.neg_ratio);
  if (target == 0) return set;

  const auto eligible = [&](size_t i, size_t j) {
    return LabelPair(ads[i], ads[j], options.strategy) == PairLabel::kNegative;
  };
  if (target * 2 > available) {
    std::vector<std::pair<uint32_t, uint32_t>> all;
    all.reserve(available);
    for (size_t i = 0; i < ads.size(); ++i) {
      for (size_t j = i + 1; j < ads.size(); ++j) {
        if (eligible(i, j)) all.emplace_back(i, j);
      }
    }
    for (size_t t = 0; t < target; ++t) {
      std::swap(all[t], all[t + rng.Below(all.size() - t)]);
      set.pairs.push_back(MakePair(ads[all[t].first], ads[all[t].second], -1,
                                   options.strategy));
    }
    return set;
  }
  std::unordered_set<uint64_t> taken;
  const uint64_t n = ads.size();
  while (taken.size() < target) {
    uint64_t i = rng.Below(n);
    uint64_t j = rng.Below(n);
    if (i == j) continue;
    if (j < i) std::swap(i, j);
    if (!eligible(i, j) || !taken.insert(i * n + j).second) continue;
    set.pairs.push_back(MakePair(ads[i], ads[j], -1, options.strategy));
  }
  return set;
}

namespace {

double PairSquaredError(const Embedding& a, const Embedding& b, int label) {
  const double diff = Cosine(a, b) - static_cast<double>(label);
  return diff * diff;
}

PairLoss Finish(std::vector<double> per_pair) {
  PairLoss loss;
  loss.per_pair = std::move(per_pair);
  double sum = 0.0;
  for (double v : loss.per_pair) sum += v;
  loss.mean = loss.per_pair.empty() ? 0.0 : sum / static_cast<double>(loss.per_pair.size());
  return loss;
}

}  // namespace

PairLoss CosineMseLoss(const PairSet& pairs,
                       const std::unordered_map<std::string, Embedding>& embeddings) {
  const auto lookup = [&](const std::string& id) -> const Embedding& {
    auto it = embeddings.find(id);
    if (it == embeddings.end()) {
      Fail(ErrorKind::kNotFound, "no embedding for ad '" + id + "'");
    }
    return it->second;
  };
  std::vector<double> per_pair;
  per_pair.reserve(pairs.pairs.size());
  for (const auto& p : pairs.pairs) {
    per_pair.push_back(PairSquaredError(lookup(p.ad_id_a), lookup(p.ad_id_b), p.label));
  }
  return Finish(std::move(per_pair));
}

PairLoss CosineMseLoss(const PairSet& pairs, const AdPool& pool,
                       const EmbeddingProvider& embedder) {
  std::unordered_map<std::string, Embedding> embeddings;
  for (const auto& p : pairs.pairs) {
    for (const auto* id : {&p.ad_id_a, &p.ad_id_b}) {
      if (!embeddings.contains(*id)) {
        embeddings.emplace(*id, embedder.Embed(pool.Get(*id).Text().full_text));
      }
    }
  }
  return CosineMseLoss(pairs, embeddings);
}

PairLoss CosineMseLoss(std::span<const TextPair> pairs, const EmbeddingProvider& embedder) {
  std::vector<double> per_pair;
  per_pair.reserve(pairs.size());
  for (const auto& p : pairs) {
    per_pair.push_back(PairSquaredError(embedder.Embed(p.text_a), embedder.Embed(p.text_b),
                                        p.label));
  }
  return Finish(std::move(per_pair));
}

std::vector<TextPair> ToTextPairs(const PairSet& pairs, const AdPool& pool) {
  std::vector<TextPair> out;
  out.reserve(pairs.pairs.size());
  for (const auto& p : pairs.pairs) {
    out.push_back({pool.Get(p.ad_id_a).Text().full_text,
                   pool.Get(p.ad_id_b).Text().full_text, p.label});
  }
  return out;
}

void ExportPairs(const PairSet& pairs, const AdPool& pool,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& p : ToTextPairs(pairs, pool)) {
    out << nlohmann::json{{"text_a", p.text_a}, {"text_b", p.text_b}, {"label", p.label}}.dump()
        << '\n';
  }
  if (!out) Fail(ErrorKind::kIo, "failed writing " + path.string());
}

std::vector<TextPair> ImportPairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<TextPair> out;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      TextPair pair{doc.at("text_a").get<std::string>(), doc.at("text_b").get<std::string>(),
                    doc.at("label").get<int>()};
      if (pair.label != 1 && pair.label != -1) {
        Fail(ErrorKind::kParse, "label must be 1 or -1");
      }
      out.push_back(std::move(pair));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace adstrength
