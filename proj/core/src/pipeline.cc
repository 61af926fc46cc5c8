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

#include "adstrength/pipeline.h"

#include <algorithm>

namespace adstrength {

Vocab BuildVocab(const AdPool& pool, std::span<const std::string> ad_ids, uint32_t min_df) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(ad_ids.size());
  for (const auto& id : ad_ids) docs.push_back(Tokenize(pool.Get(id).Text().full_text));
  return Vocab::Build(docs, min_df);
}

std::vector<EvalRecord> ScoreAds(const AdPool& pool, std::span<const std::string> ad_ids,
                                 const PctrProvider& pctr) {
  std::vector<EvalRecord> records;
  records.reserve(ad_ids.size());
  for (const auto& id : ad_ids) {
    const Ad& ad = pool.Get(id);
    if (ad.impressions == 0) continue;
    records.push_back(MakeEvalRecord(ad, pctr.Predict(ad.Text(), ad.publisher)));
  }
  return records;
}

CtrRun RunCtrExperiment(const AdPool& pool, const Split& split, ModelVariant variant,
                        const TrainConfig& config, uint32_t min_df, size_t max_publishers) {
  CtrRun run;
  run.vocab = std::make_shared<const Vocab>(BuildVocab(pool, split.train, min_df));
  const auto& whitelist = pool.publisher_whitelist();
  PublisherEncoder publishers(std::vector<std::string>(
      whitelist.begin(), whitelist.begin() + std::min(max_publishers, whitelist.size())));
  const TrainingSet data =
      BuildTrainingSet(pool, split.train, *run.vocab, publishers, config.feature_scheme);
  run.model = std::make_shared<const LinearCtrModel>(
      LinearCtrModel::Train(data, run.vocab, publishers, config, variant));
  run.test = EvaluateCtr(ScoreAds(pool, split.test, *run.model));
  return run;
}

}  // namespace adstrength
