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

#ifndef ADSTRENGTH_CTRMODEL_H_
#define ADSTRENGTH_CTRMODEL_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adstrength/corpus.h"
#include "adstrength/textproc.h"
#include "json.hpp"

namespace adstrength {

inline constexpr double kMinPctr = 1e-6;
inline constexpr double kMaxPctr = 1.0 - 1e-6;

// P(click | ad text, publisher). Implementations are deterministic for a
// fixed state, return values strictly inside (0, 1) and are safe to call
// from multiple threads.
class PctrProvider {
 public:
  virtual ~PctrProvider() = default;
  virtual double Predict(const AdText& text, std::string_view publisher) const = 0;
};

// One-hot layout for publishers: whitelist columns in order, OTHER last.
class PublisherEncoder {
 public:
  PublisherEncoder() : PublisherEncoder(std::vector<std::string>{}) {}
  explicit PublisherEncoder(std::vector<std::string> whitelist);

  size_t size() const { return whitelist_.size() + 1; }
  uint32_t OtherColumn() const { return static_cast<uint32_t>(whitelist_.size()); }
  uint32_t Column(std::string_view publisher) const;
  const std::vector<std::string>& whitelist() const { return whitelist_; }

 private:
  std::vector<std::string> whitelist_;
  std::unordered_map<std::string, uint32_t> columns_;
};

// Rows of (text features, publisher column, click weight, non-click weight).
// Each ad contributes one row carrying both of its weighted samples; the
// loss treats them as the two samples they are.
struct TrainingSet {
  size_t text_dim = 0;
  size_t publisher_dim = 1;
  std::vector<SparseVec> text;
  std::vector<uint32_t> publisher;
  std::vector<double> positive_weight;
  std::vector<double> negative_weight;

  size_t rows() const { return text.size(); }
  double TotalWeight() const;
  void AddRow(SparseVec features, uint32_t publisher_column, double positive,
              double negative);
  void AddSample(const SparseVec& features, uint32_t publisher_column, int label,
                 double weight);
};

TrainingSet BuildTrainingSet(const AdPool& pool,
                             std::span<const std::string> ad_ids,
                             const Vocab& vocab,
                             const PublisherEncoder& publishers,
                             FeatureScheme scheme);

enum class ModelVariant { kLr, kNblr };

std::string_view ModelVariantName(ModelVariant variant);
ModelVariant ParseModelVariant(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 1000;
  double l2_penalty = 0.01;
  double nb_alpha = 1.0;
  uint64_t seed = 0;
  FeatureScheme feature_scheme = FeatureScheme::kCounts;

  void Validate() const;
  nlohmann::json ToJson() const;
};

// r = ln((p/|p|_1) / (q/|q|_1)) with p, q the alpha-smoothed weighted
// feature sums of the click and non-click samples.
std::vector<double> NbLogRatio(const TrainingSet& data, double alpha);

// Weighted binary cross entropy normalized by total sample weight, plus
// l2_penalty/2 * |w|^2 over all non-bias weights. Parameter layout is
// [text features | publisher one-hot | bias]. `nb_ratio`, when non-empty,
// scales text features elementwise.
double WeightedBceLoss(const TrainingSet& data, std::span<const double> params,
                       std::span<const double> nb_ratio, double l2_penalty);
std::vector<double> WeightedBceGradient(const TrainingSet& data,
                                        std::span<const double> params,
                                        std::span<const double> nb_ratio,
                                        double l2_penalty);

struct FitResult {
  std::vector<double> params;
  // Loss at the start of each epoch, then the loss after the last update.
  std::vector<double> loss_history;
  double final_loss() const { return loss_history.back(); }
};

// Full-batch gradient descent from zero initialization.
FitResult FitLinear(const TrainingSet& data, const TrainConfig& config,
                    std::span<const double> nb_ratio = {});

class LinearCtrModel : public PctrProvider {
 public:
  static LinearCtrModel Train(const TrainingSet& data,
                              std::shared_ptr<const Vocab> vocab,
                              PublisherEncoder publishers,
                              const TrainConfig& config, ModelVariant variant);

  // Assembles a model from explicit parameters (used by loaders and tests).
  LinearCtrModel(ModelVariant variant, std::shared_ptr<const Vocab> vocab,
                 PublisherEncoder publishers, FeatureScheme scheme,
                 std::vector<double> params, std::vector<double> nb_ratio);

  double Predict(const AdText& text, std::string_view publisher) const override;
  double PredictFeatures(const SparseVec& text, uint32_t publisher_column) const;
  double Logit(const SparseVec& text, uint32_t publisher_column) const;

  ModelVariant variant() const { return variant_; }
  FeatureScheme feature_scheme() const { return scheme_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& nb_ratio() const { return nb_ratio_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  const PublisherEncoder& publishers() const { return publishers_; }
  const Vocab& vocab() const { return *vocab_; }
  double PublisherWeight(std::string_view publisher) const;
  double Bias() const { return params_.back(); }

  nlohmann::json ToJson() const;
  static LinearCtrModel FromJson(const nlohmann::json& doc,
                                 std::shared_ptr<const Vocab> vocab);
  void Save(const std::filesystem::path& path) const;
  static LinearCtrModel Load(const std::filesystem::path& path,
                             std::shared_ptr<const Vocab> vocab);

 private:
  ModelVariant variant_;
  std::shared_ptr<const Vocab> vocab_;
  PublisherEncoder publishers_;
  FeatureScheme scheme_;
  std::vector<double> params_;
  std::vector<double> nb_ratio_;
  std::vector<double> loss_history_;
};

class ConstantPctrProvider : public PctrProvider {
 public:
  explicit ConstantPctrProvider(double pctr);
  double Predict(const AdText&, std::string_view) const override { return pctr_; }

 private:
  double pctr_;
};

// Fixture provider: exact composed-text lookup with a default. File format:
// {"default": 0.01, "entries": {"<composed ad text>": 0.02, ...}}.
class TablePctrProvider : public PctrProvider {
 public:
  TablePctrProvider(std::unordered_map<std::string, double> entries,
                    double fallback);
  static TablePctrProvider Load(const std::filesystem::path& path);

  double Predict(const AdText& text, std::string_view publisher) const override;

 private:
  std::unordered_map<std::string, double> entries_;
  double fallback_;
};

struct HttpClientOptions {
  std::chrono::milliseconds timeout{200};
  size_t max_idle_connections = 8;
};

class JsonHttpClient;

// POSTs {"text", "publisher"} to `endpoint` and expects {"pctr": float}.
// Errors: kNetwork, kTimeout, kMalformedResponse, kOutOfRange.
class ExternalPctrClient : public PctrProvider {
 public:
  ExternalPctrClient(const std::string& endpoint, HttpClientOptions options = {});
  ~ExternalPctrClient() override;

  double Predict(const AdText& text, std::string_view publisher) const override;

 private:
  std::unique_ptr<JsonHttpClient> http_;
};

}  // namespace adstrength

#endif  // ADSTRENGTH_CTRMODEL_H_
