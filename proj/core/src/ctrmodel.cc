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

#include "adstrength/ctrmodel.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "adstrength/error.h"
#include "adstrength/http_client.h"

namespace adstrength {
namespace {

// log(1 + e^z) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double ClampPctr(double p) { return std::clamp(p, kMinPctr, kMaxPctr); }

double RowLogit(const TrainingSet& data, size_t row,
                std::span<const double> params, std::span<const double> nb_ratio) {
  double z = params.back();
  for (const auto& [index, value] : data.text[row].entries()) {
    z += params[index] * (nb_ratio.empty() ? value : value * nb_ratio[index]);
  }
  z += params[data.text_dim + data.publisher[row]];
  return z;
}

void CheckParams(const TrainingSet& data, std::span<const double> params,
                 std::span<const double> nb_ratio) {
  if (params.size() != data.text_dim + data.publisher_dim + 1) {
    Fail(ErrorKind::kInvalidArgument, "parameter vector has wrong length");
  }
  if (!nb_ratio.empty() && nb_ratio.size() != data.text_dim) {
    Fail(ErrorKind::kInvalidArgument, "nb ratio has wrong length");
  }
}

// One pass computing the loss and, if requested, its gradient.
double LossAndGradient(const TrainingSet& data, std::span<const double> params,
                       std::span<const double> nb_ratio, double l2_penalty,
                       std::vector<double>* gradient) {
  CheckParams(data, params, nb_ratio);
  const double total = data.TotalWeight();
  if (!(total > 0)) {
    Fail(ErrorKind::kFailedPrecondition, "training set has no sample weight");
  }
  if (gradient) gradient->assign(params.size(), 0.0);
  double loss = 0.0;
  for (size_t row = 0; row < data.rows(); ++row) {
    const double pos = data.positive_weight[row];
    const double neg = data.negative_weight[row];
    const double z = RowLogit(data, row, params, nb_ratio);
    loss += pos * Softplus(-z) + neg * Softplus(z);
    if (!gradient) continue;
    const double dz = ((pos + neg) * Sigmoid(z) - pos) / total;
    auto& g = *gradient;
    for (const auto& [index, value] : data.text[row].entries()) {
      g[index] += dz * (nb_ratio.empty() ? value : value * nb_ratio[index]);
    }
    g[data.text_dim + data.publisher[row]] += dz;
    g.back() += dz;
  }
  loss /= total;
  double norm2 = 0.0;
  for (size_t i = 0; i + 1 < params.size(); ++i) {
    norm2 += params[i] * params[i];
    if (gradient) (*gradient)[i] += l2_penalty * params[i];
  }
  return loss + 0.5 * l2_penalty * norm2;
}

}  // namespace

PublisherEncoder::PublisherEncoder(std::vector<std::string> whitelist)
    : whitelist_(std::move(whitelist)) {
  for (uint32_t i = 0; i < whitelist_.size(); ++i) {
    if (whitelist_[i] == kOtherPublisher) {
      Fail(ErrorKind::kInvalidArgument, "OTHER cannot be a whitelisted publisher");
    }
    if (!columns_.emplace(whitelist_[i], i).second) {
      Fail(ErrorKind::kInvalidArgument,
           "duplicate publisher '" + whitelist_[i] + "'");
    }
  }
}

uint32_t PublisherEncoder::Column(std::string_view publisher) const {
  auto it = columns_.find(std::string(publisher));
  return it == columns_.end() ? OtherColumn() : it->second;
}

double TrainingSet::TotalWeight() const {
  double total = 0.0;
  for (size_t i = 0; i < rows(); ++i) total += positive_weight[i] + negative_weight[i];
  return total;
}

void TrainingSet::AddRow(SparseVec features, uint32_t publisher_column,
                         double positive, double negative) {
  if (publisher_column >= publisher_dim) {
    Fail(ErrorKind::kInvalidArgument, "publisher column out of range");
  }
  if (!features.empty() && features.entries().back().first >= text_dim) {
    Fail(ErrorKind::kInvalidArgument, "feature index out of range");
  }
  text.push_back(std::move(features));
  publisher.push_back(publisher_column);
  positive_weight.push_back(positive);
  negative_weight.push_back(negative);
}

void TrainingSet::AddSample(const SparseVec& features, uint32_t publisher_column,
                            int label, double weight) {
  AddRow(features, publisher_column, label == 1 ? weight : 0.0,
         label == 1 ? 0.0 : weight);
}

TrainingSet BuildTrainingSet(const AdPool& pool,
                             std::span<const std::string> ad_ids,
                             const Vocab& vocab,
                             const PublisherEncoder& publishers,
                             FeatureScheme scheme) {
  TrainingSet data;
  data.text_dim = vocab.size();
  data.publisher_dim = publishers.size();
  for (const auto& id : ad_ids) {
    const Ad& ad = pool.Get(id);
    double positive = 0.0;
    double negative = 0.0;
    for (const auto& sample : ExpandSamples(ad)) {
      (sample.label == 1 ? positive : negative) += static_cast<double>(sample.weight);
    }
    if (positive + negative == 0.0) continue;
    data.AddRow(Featurize(ad.Text().full_text, vocab, scheme),
                publishers.Column(ad.publisher), positive, negative);
  }
  return data;
}

std::string_view ModelVariantName(ModelVariant variant) {
  return variant == ModelVariant::kLr ? "lr" : "nblr";
}

ModelVariant ParseModelVariant(std::string_view name) {
  if (name == "lr") return ModelVariant::kLr;
  if (name == "nblr") return ModelVariant::kNblr;
  Fail(ErrorKind::kInvalidArgument, "unknown model variant '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0)) Fail(ErrorKind::kInvalidArgument, "learning_rate must be > 0");
  if (epochs < 1) Fail(ErrorKind::kInvalidArgument, "epochs must be >= 1");
  if (!(nb_alpha > 0)) Fail(ErrorKind::kInvalidArgument, "nb_alpha must be > 0");
  if (!(l2_penalty >= 0)) Fail(ErrorKind::kInvalidArgument, "l2_penalty must be >= 0");
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs},
          {"l2_penalty", l2_penalty},       {"nb_alpha", nb_alpha},
          {"seed", seed},                   {"feature_scheme", FeatureSchemeName(feature_scheme)}};
}

std::vector<double> NbLogRatio(const TrainingSet& data, double alpha) {
  if (!(alpha > 0)) Fail(ErrorKind::kInvalidArgument, "nb alpha must be > 0");
  std::vector<double> p(data.text_dim, alpha);
  std::vector<double> q(data.text_dim, alpha);
  double positive_mass = 0.0;
  double negative_mass = 0.0;
  for (size_t row = 0; row < data.rows(); ++row) {
    const double pos = data.positive_weight[row];
    const double neg = data.negative_weight[row];
    positive_mass += pos;
    negative_mass += neg;
    for (const auto& [index, value] : data.text[row].entries()) {
      p[index] += pos * value;
      q[index] += neg * value;
    }
  }
  if (!(positive_mass > 0)) {
    Fail(ErrorKind::kFailedPrecondition, "no positive (click) mass in training data");
  }
  if (!(negative_mass > 0)) {
    Fail(ErrorKind::kFailedPrecondition, "no negative (non-click) mass in training data");
  }
  double p_norm = 0.0;
  double q_norm = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    p_norm += std::abs(p[i]);
    q_norm += std::abs(q[i]);
  }
  std::vector<double> ratio(data.text_dim);
  for (size_t i = 0; i < ratio.size(); ++i) {
    ratio[i] = std::log((p[i] / p_norm) / (q[i] / q_norm));
    if (!std::isfinite(ratio[i])) {
      Fail(ErrorKind::kDivergence, "nb ratio is not finite at feature " + std::to_string(i));
    }
  }
  return ratio;
}

double WeightedBceLoss(const TrainingSet& data, std::span<const double> params,
                       std::span<const double> nb_ratio, double l2_penalty) {
  return LossAndGradient(data, params, nb_ratio, l2_penalty, nullptr);
}

std::vector<double> WeightedBceGradient(const TrainingSet& data,
                                        std::span<const double> params,
                                        std::span<const double> nb_ratio,
                                        double l2_penalty) {
  std::vector<double> gradient;
  LossAndGradient(data, params, nb_ratio, l2_penalty, &gradient);
  return gradient;
}

FitResult FitLinear(const TrainingSet& data, const TrainConfig& config,
                    std::span<const double> nb_ratio) {
  config.Validate();
  bool has_positive = false;
  bool has_negative = false;
  for (size_t row = 0; row < data.rows(); ++row) {
    has_positive |= data.positive_weight[row] > 0;
    has_negative |= data.negative_weight[row] > 0;
  }
  if (!has_positive || !has_negative) {
    Fail(ErrorKind::kFailedPrecondition,
         "training data must contain both clicked and non-clicked samples");
  }
  FitResult fit;
  fit.params.assign(data.text_dim + data.publisher_dim + 1, 0.0);
  fit.loss_history.reserve(config.epochs + 1);
  std::vector<double> gradient;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss =
        LossAndGradient(data, fit.params, nb_ratio, config.l2_penalty, &gradient);
    if (!std::isfinite(loss)) {
      Fail(ErrorKind::kDivergence,
           "training loss became non-finite at epoch " + std::to_string(epoch));
    }
    fit.loss_history.push_back(loss);
    for (size_t i = 0; i < fit.params.size(); ++i) {
      fit.params[i] -= config.learning_rate * gradient[i];
    }
  }
  const double final_loss =
      LossAndGradient(data, fit.params, nb_ratio, config.l2_penalty, nullptr);
  if (!std::isfinite(final_loss)) {
    Fail(ErrorKind::kDivergence, "training loss became non-finite at epoch " +
                                     std::to_string(config.epochs));
  }
  fit.loss_history.push_back(final_loss);
  return fit;
}

LinearCtrModel LinearCtrModel::Train(const TrainingSet& data,
                                     std::shared_ptr<const Vocab> vocab,
                                     PublisherEncoder publishers,
                                     const TrainConfig& config,
                                     ModelVariant variant) {
  if (data.text_dim != vocab->size() || data.publisher_dim != publishers.size()) {
    Fail(ErrorKind::kInvalidArgument, "training set does not match vocab/publishers");
  }
  std::vector<double> ratio;
  if (variant == ModelVariant::kNblr) ratio = NbLogRatio(data, config.nb_alpha);
  FitResult fit = FitLinear(data, config, ratio);
  LinearCtrModel model(variant, std::move(vocab), std::move(publishers),
                       config.feature_scheme, std::move(fit.params), std::move(ratio));
  model.loss_history_ = std::move(fit.loss_history);
  return model;
}

LinearCtrModel::LinearCtrModel(ModelVariant variant,
                               std::shared_ptr<const Vocab> vocab,
                               PublisherEncoder publishers, FeatureScheme scheme,
                               std::vector<double> params,
                               std::vector<double> nb_ratio)
    : variant_(variant),
      vocab_(std::move(vocab)),
      publishers_(std::move(publishers)),
      scheme_(scheme),
      params_(std::move(params)),
      nb_ratio_(std::move(nb_ratio)) {
  if (params_.size() != vocab_->size() + publishers_.size() + 1) {
    Fail(ErrorKind::kInvalidArgument, "model weights have wrong length");
  }
  if (variant_ == ModelVariant::kNblr && nb_ratio_.size() != vocab_->size()) {
    Fail(ErrorKind::kInvalidArgument, "nblr model needs an nb ratio per text feature");
  }
  if (variant_ == ModelVariant::kLr && !nb_ratio_.empty()) {
    Fail(ErrorKind::kInvalidArgument, "lr model cannot carry an nb ratio");
  }
  for (double v : params_) {
    if (!std::isfinite(v)) Fail(ErrorKind::kInvalidArgument, "non-finite model weight");
  }
  for (double v : nb_ratio_) {
    if (!std::isfinite(v)) Fail(ErrorKind::kInvalidArgument, "non-finite nb ratio");
  }
}

double LinearCtrModel::Logit(const SparseVec& text, uint32_t publisher_column) const {
  double z = params_.back();
  for (const auto& [index, value] : text.entries()) {
    z += params_[index] * (nb_ratio_.empty() ? value : value * nb_ratio_[index]);
  }
  return z + params_[vocab_->size() + publisher_column];
}

double LinearCtrModel::PredictFeatures(const SparseVec& text,
                                       uint32_t publisher_column) const {
  return ClampPctr(Sigmoid(Logit(text, publisher_column)));
}

double LinearCtrModel::Predict(const AdText& text, std::string_view publisher) const {
  return PredictFeatures(Featurize(text.full_text, *vocab_, scheme_),
                         publishers_.Column(publisher));
}

double LinearCtrModel::PublisherWeight(std::string_view publisher) const {
  return params_[vocab_->size() + publishers_.Column(publisher)];
}

nlohmann::json LinearCtrModel::ToJson() const {
  nlohmann::json doc = {{"variant", ModelVariantName(variant_)},
                        {"vocab_hash", vocab_->Hash()},
                        {"feature_scheme", FeatureSchemeName(scheme_)},
                        {"publishers", publishers_.whitelist()},
                        {"weights", params_}};
  if (!nb_ratio_.empty()) doc["nb_ratio"] = nb_ratio_;
  return doc;
}

LinearCtrModel LinearCtrModel::FromJson(const nlohmann::json& doc,
                                        std::shared_ptr<const Vocab> vocab) {
  try {
    if (doc.at("vocab_hash").get<std::string>() != vocab->Hash()) {
      Fail(ErrorKind::kInvalidArgument, "model was trained with a different vocab");
    }
    std::vector<double> ratio;
    if (doc.contains("nb_ratio")) ratio = doc.at("nb_ratio").get<std::vector<double>>();
    return LinearCtrModel(
        ParseModelVariant(doc.at("variant").get<std::string>()), std::move(vocab),
        PublisherEncoder(doc.at("publishers").get<std::vector<std::string>>()),
        ParseFeatureScheme(doc.at("feature_scheme").get<std::string>()),
        doc.at("weights").get<std::vector<double>>(), std::move(ratio));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("malformed model: ") + e.what());
  }
}

void LinearCtrModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << ToJson().dump() << '\n';
}

LinearCtrModel LinearCtrModel::Load(const std::filesystem::path& path,
                                    std::shared_ptr<const Vocab> vocab) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  try {
    return FromJson(nlohmann::json::parse(in), std::move(vocab));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

ConstantPctrProvider::ConstantPctrProvider(double pctr) : pctr_(pctr) {
  if (!(pctr > 0 && pctr < 1)) {
    Fail(ErrorKind::kOutOfRange, "constant pctr must lie in (0, 1)");
  }
}

TablePctrProvider::TablePctrProvider(std::unordered_map<std::string, double> entries,
                                     double fallback)
    : entries_(std::move(entries)), fallback_(fallback) {
  if (!(fallback > 0 && fallback < 1)) {
    Fail(ErrorKind::kOutOfRange, "default pctr must lie in (0, 1)");
  }
  for (const auto& [text, pctr] : entries_) {
    if (!(pctr > 0 && pctr < 1)) {
      Fail(ErrorKind::kOutOfRange, "pctr for '" + text + "' must lie in (0, 1)");
    }
  }
}

TablePctrProvider TablePctrProvider::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    return TablePctrProvider(
        doc.value("entries", nlohmann::json::object())
            .get<std::unordered_map<std::string, double>>(),
        doc.at("default").get<double>());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

double TablePctrProvider::Predict(const AdText& text, std::string_view) const {
  auto it = entries_.find(text.full_text);
  return it == entries_.end() ? fallback_ : it->second;
}

ExternalPctrClient::ExternalPctrClient(const std::string& endpoint,
                                       HttpClientOptions options)
    : http_(std::make_unique<JsonHttpClient>(endpoint, options)) {}

ExternalPctrClient::~ExternalPctrClient() = default;

double ExternalPctrClient::Predict(const AdText& text,
                                   std::string_view publisher) const {
  const auto response = http_->Post(
      {{"text", text.full_text}, {"publisher", std::string(publisher)}});
  const auto it = response.find("pctr");
  if (!response.is_object() || it == response.end() || !it->is_number()) {
    Fail(ErrorKind::kMalformedResponse, "pctr response lacks a numeric 'pctr'");
  }
  const double pctr = it->get<double>();
  if (!(pctr > 0.0 && pctr < 1.0)) {
    Fail(ErrorKind::kOutOfRange,
         "external pctr " + std::to_string(pctr) + " outside (0, 1)");
  }
  return pctr;
}

}  // namespace adstrength
