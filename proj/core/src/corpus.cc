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

#include "adstrength/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "adstrength/error.h"
#include "adstrength/random.h"

namespace adstrength {

nlohmann::json AdToJson(const Ad& ad) {
  return {{"ad_id", ad.ad_id},
          {"advertiser_id", ad.advertiser_id},
          {"campaign_id", ad.campaign_id},
          {"adgroup_id", ad.adgroup_id},
          {"category", ad.category},
          {"title", ad.title},
          {"description", ad.description},
          {"cta", ad.cta},
          {"publisher", ad.publisher},
          {"impressions", ad.impressions},
          {"clicks", ad.clicks}};
}

namespace {

std::string RequireString(const nlohmann::json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end()) {
    Fail(ErrorKind::kParse, std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    Fail(ErrorKind::kParse, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

int64_t RequireCount(const nlohmann::json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end()) {
    Fail(ErrorKind::kParse, std::string("missing field '") + field + "'");
  }
  if (!it->is_number_integer() || it->get<int64_t>() < 0) {
    Fail(ErrorKind::kParse, std::string("field '") + field +
                                "' must be a non-negative integer");
  }
  return it->get<int64_t>();
}

}  // namespace

Ad AdFromJson(const nlohmann::json& record) {
  if (!record.is_object()) Fail(ErrorKind::kParse, "ad record must be an object");
  Ad ad;
  ad.ad_id = RequireString(record, "ad_id");
  ad.advertiser_id = RequireString(record, "advertiser_id");
  ad.campaign_id = RequireString(record, "campaign_id");
  ad.adgroup_id = RequireString(record, "adgroup_id");
  ad.category = RequireString(record, "category");
  ad.title = RequireString(record, "title");
  ad.description = RequireString(record, "description");
  ad.cta = RequireString(record, "cta");
  ad.publisher = RequireString(record, "publisher");
  ad.impressions = RequireCount(record, "impressions");
  ad.clicks = RequireCount(record, "clicks");
  return ad;
}

AdPool AdPool::Create(std::vector<Ad> ads, size_t top_k_publishers) {
  AdPool pool;
  std::unordered_map<std::string, std::string> campaign_of_adgroup;
  std::unordered_map<std::string, std::string> advertiser_of_campaign;
  std::map<std::string, int64_t> publisher_impressions;
  for (size_t i = 0; i < ads.size(); ++i) {
    const Ad& ad = ads[i];
    if (ad.ad_id.empty()) Fail(ErrorKind::kInvalidArgument, "empty ad_id");
    if (ad.clicks > ad.impressions) {
      Fail(ErrorKind::kInvalidArgument,
           "ad '" + ad.ad_id + "': clicks exceed impressions");
    }
    if (ad.clicks < 0 || ad.impressions < 0) {
      Fail(ErrorKind::kInvalidArgument, "ad '" + ad.ad_id + "': negative count");
    }
    if (!pool.by_id_.emplace(ad.ad_id, i).second) {
      Fail(ErrorKind::kInvalidArgument, "duplicate ad_id '" + ad.ad_id + "'");
    }
    auto [group_it, new_group] =
        campaign_of_adgroup.emplace(ad.adgroup_id, ad.campaign_id);
    if (!new_group && group_it->second != ad.campaign_id) {
      Fail(ErrorKind::kInvalidArgument,
           "ad '" + ad.ad_id + "': adgroup '" + ad.adgroup_id +
               "' belongs to more than one campaign");
    }
    auto [campaign_it, new_campaign] =
        advertiser_of_campaign.emplace(ad.campaign_id, ad.advertiser_id);
    if (!new_campaign && campaign_it->second != ad.advertiser_id) {
      Fail(ErrorKind::kInvalidArgument,
           "ad '" + ad.ad_id + "': campaign '" + ad.campaign_id +
               "' belongs to more than one advertiser");
    }
    publisher_impressions[ad.publisher] += ad.impressions;
  }

  std::vector<std::pair<std::string, int64_t>> ranked(
      publisher_impressions.begin(), publisher_impressions.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::set<std::string> kept;
  for (const auto& [publisher, impressions] : ranked) {
    if (pool.publisher_whitelist_.size() >= top_k_publishers) break;
    if (publisher == kOtherPublisher) continue;
    pool.publisher_whitelist_.push_back(publisher);
    kept.insert(publisher);
  }
  for (Ad& ad : ads) {
    if (!kept.contains(ad.publisher)) ad.publisher = std::string(kOtherPublisher);
  }
  pool.ads_ = std::move(ads);
  return pool;
}

const Ad* AdPool::Find(std::string_view ad_id) const {
  auto it = by_id_.find(std::string(ad_id));
  return it == by_id_.end() ? nullptr : &ads_[it->second];
}

const Ad& AdPool::Get(std::string_view ad_id) const {
  const Ad* ad = Find(ad_id);
  if (ad == nullptr) {
    Fail(ErrorKind::kNotFound, "unknown ad_id '" + std::string(ad_id) + "'");
  }
  return *ad;
}

AdPool AdPool::Subset(const std::vector<std::string>& ad_ids) const {
  AdPool subset;
  subset.publisher_whitelist_ = publisher_whitelist_;
  subset.ads_.reserve(ad_ids.size());
  for (const auto& id : ad_ids) {
    if (!subset.by_id_.emplace(id, subset.ads_.size()).second) {
      Fail(ErrorKind::kInvalidArgument, "duplicate ad_id '" + id + "' in subset");
    }
    subset.ads_.push_back(Get(id));
  }
  return subset;
}

AdPool ParsePool(std::istream& in, size_t top_k_publishers) {
  std::vector<Ad> ads;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      ads.push_back(AdFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kParse,
           "line " + std::to_string(line_number) + ": " + e.what());
    } catch (const Error& e) {
      Fail(e.kind(), "line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return AdPool::Create(std::move(ads), top_k_publishers);
}

AdPool LoadPool(const std::filesystem::path& path, size_t top_k_publishers) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  try {
    return ParsePool(in, top_k_publishers);
  } catch (const Error& e) {
    Fail(e.kind(), path.string() + ": " + e.what());
  }
}

void WritePool(std::ostream& out, const std::vector<Ad>& ads) {
  for (const Ad& ad : ads) out << AdToJson(ad).dump() << '\n';
}

std::vector<WeightedSample> ExpandSamples(const Ad& ad) {
  std::vector<WeightedSample> samples;
  if (ad.clicks > 0) samples.push_back({ad.ad_id, 1, ad.clicks});
  if (ad.impressions > ad.clicks) {
    samples.push_back({ad.ad_id, 0, ad.impressions - ad.clicks});
  }
  return samples;
}

std::string_view SplitModeName(SplitMode mode) {
  return mode == SplitMode::kWarm ? "warm" : "cold";
}

SplitMode ParseSplitMode(std::string_view name) {
  if (name == "warm") return SplitMode::kWarm;
  if (name == "cold") return SplitMode::kCold;
  Fail(ErrorKind::kInvalidArgument, "unknown split mode '" + std::string(name) + "'");
}

nlohmann::json Split::ToJson() const {
  return {{"mode", SplitModeName(mode)},
          {"seed", seed},
          {"train", train},
          {"validation", validation},
          {"test", test}};
}

Split Split::FromJson(const nlohmann::json& doc) {
  try {
    Split split;
    split.mode = ParseSplitMode(doc.at("mode").get<std::string>());
    split.seed = doc.at("seed").get<uint64_t>();
    split.train = doc.at("train").get<std::vector<std::string>>();
    split.validation = doc.at("validation").get<std::vector<std::string>>();
    split.test = doc.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("malformed split: ") + e.what());
  }
}

void Split::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << ToJson().dump() << '\n';
}

Split Split::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

std::array<int64_t, 3> LargestRemainder(int64_t total,
                                        const SplitFractions& fractions) {
  const std::array<double, 3> shares = {fractions.train, fractions.validation,
                                        fractions.test};
  std::array<int64_t, 3> counts{};
  std::array<double, 3> remainders{};
  int64_t assigned = 0;
  for (size_t i = 0; i < 3; ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    counts[i] = static_cast<int64_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainders[a] > remainders[b];
  });
  for (size_t i = 0; assigned < total; i = (i + 1) % 3) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

namespace {

void ValidateFractions(const SplitFractions& f) {
  if (!(f.train > 0 && f.validation > 0 && f.test > 0)) {
    Fail(ErrorKind::kInvalidArgument, "split fractions must be positive");
  }
  if (std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    Fail(ErrorKind::kInvalidArgument, "split fractions must sum to 1");
  }
}

}  // namespace

Split MakeSplit(const AdPool& pool, const SplitFractions& fractions,
                SplitMode mode, uint64_t seed) {
  ValidateFractions(fractions);
  Split split;
  split.mode = mode;
  split.seed = seed;
  Rng rng(seed);
  std::array<std::vector<std::string>*, 3> parts = {&split.train,
                                                    &split.validation,
                                                    &split.test};

  if (mode == SplitMode::kWarm) {
    std::vector<std::string> ids;
    ids.reserve(pool.size());
    for (const Ad& ad : pool.ads()) ids.push_back(ad.ad_id);
    rng.Shuffle(std::span<std::string>(ids));
    const auto counts = LargestRemainder(static_cast<int64_t>(ids.size()), fractions);
    size_t cursor = 0;
    for (size_t p = 0; p < 3; ++p) {
      for (int64_t i = 0; i < counts[p]; ++i) parts[p]->push_back(ids[cursor++]);
    }
    return split;
  }

  std::map<std::string, std::vector<const Ad*>> by_advertiser;
  int64_t total_impressions = 0;
  for (const Ad& ad : pool.ads()) {
    by_advertiser[ad.advertiser_id].push_back(&ad);
    total_impressions += ad.impressions;
  }
  if (by_advertiser.size() < parts.size()) {
    Fail(ErrorKind::kInvalidArgument,
         "cold split needs at least 3 advertisers, pool has " +
             std::to_string(by_advertiser.size()));
  }
  std::vector<std::string> advertisers;
  for (const auto& [advertiser, ads] : by_advertiser) advertisers.push_back(advertiser);
  rng.Shuffle(std::span<std::string>(advertisers));
  const auto targets = LargestRemainder(total_impressions, fractions);

  std::array<int64_t, 3> mass{};
  std::array<size_t, 3> members{};
  size_t p = 0;
  for (size_t i = 0; i < advertisers.size(); ++i) {
    const size_t remaining = advertisers.size() - i;
    if (p < 2 && members[p] > 0 && remaining <= 2 - p) ++p;
    for (const Ad* ad : by_advertiser[advertisers[i]]) {
      parts[p]->push_back(ad->ad_id);
      mass[p] += ad->impressions;
    }
    ++members[p];
    if (p < 2 && mass[p] >= targets[p]) ++p;
  }
  return split;
}

}  // namespace adstrength
