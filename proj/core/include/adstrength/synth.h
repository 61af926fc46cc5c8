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

#ifndef ADSTRENGTH_SYNTH_H_
#define ADSTRENGTH_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "adstrength/corpus.h"

namespace adstrength {

// Seeded synthetic ad corpus: category-themed disjoint vocabularies, a
// nested advertiser/campaign/adgroup hierarchy, brand names in titles and a
// planted CTR structure (per-token, publisher, call-to-action and
// advertiser effects on the click logit).
struct SynthConfig {
  size_t ads = 4000;
  size_t categories = 8;
  size_t advertisers = 160;
  size_t publishers = 20;
  size_t topic_words = 100;
  double base_ctr = 0.02;
  double token_effect_sd = 0.7;
  double advertiser_effect_sd = 0.25;
  double zero_impression_rate = 0.0;
  uint64_t seed = 1;
};

struct SynthCorpus {
  std::vector<Ad> ads;
  std::vector<std::string> brands;     // one per advertiser
  std::vector<std::string> categories;
};

SynthCorpus GenerateCorpus(const SynthConfig& config);

}  // namespace adstrength

#endif  // ADSTRENGTH_SYNTH_H_
