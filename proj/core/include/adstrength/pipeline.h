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

#ifndef ADSTRENGTH_PIPELINE_H_
#define ADSTRENGTH_PIPELINE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adstrength/corpus.h"
#include "adstrength/ctrmodel.h"
#include "adstrength/metrics.h"
#include "adstrength/textproc.h"

namespace adstrength {

// Vocabulary over the composed texts of `ad_ids`.
Vocab BuildVocab(const AdPool& pool, std::span<const std::string> ad_ids,
                 uint32_t min_df = Vocab::kDefaultMinDf);

// One record per ad with impressions > 0, scored by `pctr`.
std::vector<EvalRecord> ScoreAds(const AdPool& pool, std::span<const std::string> ad_ids,
                                 const PctrProvider& pctr);

struct CtrRun {
  std::shared_ptr<const Vocab> vocab;
  std::shared_ptr<const LinearCtrModel> model;
  CtrReport test;
};

// Vocabulary and model fitted on split.train, report on split.test. The
// model one-hot covers the first `max_publishers` whitelist entries.
CtrRun RunCtrExperiment(const AdPool& pool, const Split& split, ModelVariant variant,
                        const TrainConfig& config, uint32_t min_df = Vocab::kDefaultMinDf,
                        size_t max_publishers = SIZE_MAX);

}  // namespace adstrength

#endif  // ADSTRENGTH_PIPELINE_H_
