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

#include "adstrength/embed.h"

#include <algorithm>
#include <cmath>

#include "adstrength/error.h"
#include "adstrength/http_client.h"
#include "adstrength/random.h"

namespace adstrength {

std::vector<Embedding> EmbeddingProvider::EmbedBatch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(Embed(text));
  return out;
}

void NormalizeInPlace(std::span<float> values) {
  double norm = 0.0;
  for (float v : values) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (float& v : values) v = static_cast<float>(v / norm);
}

double Cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kInvalidArgument,
         "embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
             std::to_string(b.size()));
  }
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

TfidfProvider::TfidfProvider(std::shared_ptr<const Vocab> vocab)
    : vocab_(std::move(vocab)) {}

Embedding TfidfProvider::Embed(std::string_view text) const {
  Embedding out(vocab_->size(), 0.0f);
  const SparseVec features = Featurize(text, *vocab_, FeatureScheme::kTfidf);
  for (const auto& [index, value] : features.entries()) {
    out[index] = static_cast<float>(value);
  }
  NormalizeInPlace(out);
  return out;
}

HashedProjectionProvider::HashedProjectionProvider(size_t dimension, uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension < 8) {
    Fail(ErrorKind::kInvalidArgument, "hashed projection needs dimension >= 8");
  }
}

void HashedProjectionProvider::AccumulateFeature(std::string_view feature,
                                                 std::span<double> sum) const {
  Rng rng(SplitMix64(Fnv1a64(feature) ^ SplitMix64(seed_)));
  for (double& v : sum) v += rng.Normal();
}

Embedding HashedProjectionProvider::Embed(std::string_view text) const {
  const auto tokens = Tokenize(text);
  std::vector<double> sum(dimension_, 0.0);
  for (size_t i = 0; i < tokens.size(); ++i) {
    AccumulateFeature(tokens[i], sum);
    if (i + 1 < tokens.size()) {
      AccumulateFeature(tokens[i] + '\x1f' + tokens[i + 1], sum);
    }
  }
  Embedding out(dimension_);
  for (size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(sum[i]);
  NormalizeInPlace(out);
  return out;
}

ExternalEmbeddingClient::ExternalEmbeddingClient(const std::string& endpoint,
                                                 size_t dimension,
                                                 HttpClientOptions options,
                                                 size_t batch_size)
    : http_(std::make_unique<JsonHttpClient>(endpoint, options)),
      dimension_(dimension),
      batch_size_(std::max<size_t>(batch_size, 1)) {
  if (dimension == 0) Fail(ErrorKind::kInvalidArgument, "embedding dimension must be > 0");
}

ExternalEmbeddingClient::~ExternalEmbeddingClient() = default;

size_t ExternalEmbeddingClient::requests_sent() const { return http_->requests_sent(); }

Embedding ExternalEmbeddingClient::Embed(std::string_view text) const {
  const std::string owned(text);
  return EmbedBatch(std::span<const std::string>(&owned, 1)).front();
}

std::vector<Embedding> ExternalEmbeddingClient::EmbedBatch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto batch = texts.subspan(start, std::min(batch_size_, texts.size() - start));
    const auto response =
        http_->Post({{"texts", std::vector<std::string>(batch.begin(), batch.end())}});
    const auto it = response.find("vectors");
    if (!response.is_object() || it == response.end() || !it->is_array() ||
        it->size() != batch.size()) {
      Fail(ErrorKind::kMalformedResponse,
           "embedding response must carry one vector per text");
    }
    for (const auto& row : *it) {
      if (!row.is_array() || row.size() != dimension_) {
        Fail(ErrorKind::kMalformedResponse,
             "embedding dimension mismatch: expected " + std::to_string(dimension_));
      }
      Embedding vec;
      vec.reserve(dimension_);
      for (const auto& value : row) {
        if (!value.is_number() || !std::isfinite(value.get<double>())) {
          Fail(ErrorKind::kMalformedResponse, "embedding contains a non-finite value");
        }
        vec.push_back(static_cast<float>(value.get<double>()));
      }
      NormalizeInPlace(vec);
      out.push_back(std::move(vec));
    }
  }
  return out;
}

}  // namespace adstrength
