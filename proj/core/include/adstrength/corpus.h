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

#ifndef ADSTRENGTH_CORPUS_H_
#define ADSTRENGTH_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adstrength/textproc.h"
#include "json.hpp"

namespace adstrength {

inline constexpr std::string_view kOtherPublisher = "OTHER";

struct Ad {
  std::string ad_id;
  std::string advertiser_id;
  std::string campaign_id;
  std::string adgroup_id;
  std::string category;
  std::string title;
  std::string description;
  std::string cta;
  std::string publisher;
  int64_t impressions = 0;
  int64_t clicks = 0;

  AdText Text() const { return ComposeAdText(title, description, cta); }
  double Ctr() const {
    return impressions > 0 ? static_cast<double>(clicks) / impressions : 0.0;
  }

  bool operator==(const Ad&) const = default;
};

nlohmann::json AdToJson(const Ad& ad);
// Strict: every field must be present with the right type.
Ad AdFromJson(const nlohmann::json& record);

// Immutable validated ad collection.
class AdPool {
 public:
  AdPool() = default;

  // Validates the Ad invariants and hierarchy containment, computes the
  // top-k publisher whitelist (summed impressions, ties lexicographic) and
  // rewrites every other publisher to OTHER.
  static AdPool Create(std::vector<Ad> ads, size_t top_k_publishers);

  const std::vector<Ad>& ads() const { return ads_; }
  const std::vector<std::string>& publisher_whitelist() const {
    return publisher_whitelist_;
  }
  size_t size() const { return ads_.size(); }
  bool empty() const { return ads_.empty(); }

  const Ad* Find(std::string_view ad_id) const;
  const Ad& Get(std::string_view ad_id) const;

  // Subset in the given id order; keeps this pool's whitelist.
  AdPool Subset(const std::vector<std::string>& ad_ids) const;

  bool operator==(const AdPool& other) const {
    return ads_ == other.ads_ &&
           publisher_whitelist_ == other.publisher_whitelist_;
  }

 private:
  std::vector<Ad> ads_;
  std::vector<std::string> publisher_whitelist_;
  std::unordered_map<std::string, size_t> by_id_;
};

// Parses JSON Lines (one Ad per line; blank lines skipped).
AdPool ParsePool(std::istream& in, size_t top_k_publishers);
AdPool LoadPool(const std::filesystem::path& path, size_t top_k_publishers);
void WritePool(std::ostream& out, const std::vector<Ad>& ads);

struct WeightedSample {
  std::string ad_id;
  int label = 0;
  int64_t weight = 0;

  bool operator==(const WeightedSample&) const = default;
};

// Positive sample (weight = clicks) first, then negative (impressions -
// clicks); zero-weight samples are omitted.
std::vector<WeightedSample> ExpandSamples(const Ad& ad);

enum class SplitMode { kWarm, kCold };

std::string_view SplitModeName(SplitMode mode);
SplitMode ParseSplitMode(std::string_view name);

struct SplitFractions {
  double train = 0.8;
  double validation = 0.06;
  double test = 0.14;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  SplitMode mode = SplitMode::kWarm;
  uint64_t seed = 0;

  bool operator==(const Split&) const = default;

  nlohmann::json ToJson() const;
  static Split FromJson(const nlohmann::json& doc);
  void Save(const std::filesystem::path& path) const;
  static Split Load(const std::filesystem::path& path);
};

// Largest-remainder apportionment of `total` into parts proportional to
// `fractions`; remainder ties go to the earlier part.
std::array<int64_t, 3> LargestRemainder(int64_t total,
                                        const SplitFractions& fractions);

// Warm: seeded shuffle of ads, contiguous cut by largest-remainder counts.
// Cold: seeded shuffle of advertisers, whole advertisers assigned greedily
// until each partition reaches its largest-remainder share of impressions.
Split MakeSplit(const AdPool& pool, const SplitFractions& fractions,
                SplitMode mode, uint64_t seed);

}  // namespace adstrength

#endif  // ADSTRENGTH_CORPUS_H_
