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

#ifndef ADSTRENGTH_EMBED_H_
#define ADSTRENGTH_EMBED_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adstrength/ctrmodel.h"
#include "adstrength/textproc.h"

namespace adstrength {

// Unit-norm vector, or all zeros for text with no usable tokens.
using Embedding = std::vector<float>;

// phi(text). Implementations are immutable after construction and safe to
// call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual size_t dimension() const = 0;
  virtual Embedding Embed(std::string_view text) const = 0;
  virtual std::vector<Embedding> EmbedBatch(std::span<const std::string> texts) const;
};

// Scales `values` to unit L2 norm in place; zero vectors stay zero.
void NormalizeInPlace(std::span<float> values);

// Dot product clamped to [-1, 1], accumulated in double.
double Cosine(std::span<const float> a, std::span<const float> b);

// Dense materialization of the L2-normalized tf-idf vector (d = |vocab|).
class TfidfProvider : public EmbeddingProvider {
 public:
  explicit TfidfProvider(std::shared_ptr<const Vocab> vocab);
  size_t dimension() const override { return vocab_->size(); }
  Embedding Embed(std::string_view text) const override;

 private:
  std::shared_ptr<const Vocab> vocab_;
};

// Random-projection bag of unigrams and bigrams: each feature string seeds a
// Gaussian d-vector; the text embedding is the normalized sum.
class HashedProjectionProvider : public EmbeddingProvider {
 public:
  HashedProjectionProvider(size_t dimension, uint64_t seed);
  size_t dimension() const override { return dimension_; }
  Embedding Embed(std::string_view text) const override;

 private:
  void AccumulateFeature(std::string_view feature, std::span<double> sum) const;

  size_t dimension_;
  uint64_t seed_;
};

// POSTs {"texts": [...]} and expects {"vectors": [[...], ...]}; requests are
// batched and every returned vector is re-normalized.
// Errors: kNetwork, kTimeout, kMalformedResponse (including dimension
// mismatch and non-finite values).
class ExternalEmbeddingClient : public EmbeddingProvider {
 public:
  ExternalEmbeddingClient(const std::string& endpoint, size_t dimension,
                          HttpClientOptions options = {}, size_t batch_size = 64);
  ~ExternalEmbeddingClient() override;

  size_t dimension() const override { return dimension_; }
  Embedding Embed(std::string_view text) const override;
  std::vector<Embedding> EmbedBatch(std::span<const std::string> texts) const override;
  size_t requests_sent() const;

 private:
  std::unique_ptr<JsonHttpClient> http_;
  size_t dimension_;
  size_t batch_size_;
};

}  // namespace adstrength

#endif  // ADSTRENGTH_EMBED_H_
