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

#ifndef ADSTRENGTH_ANNINDEX_H_
#define ADSTRENGTH_ANNINDEX_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adstrength/corpus.h"
#include "adstrength/ctrmodel.h"
#include "adstrength/embed.h"

namespace adstrength {

inline constexpr size_t kDefaultNeighbors = 5;
inline constexpr double kDefaultMinSimilarity = 0.6;

// Inverted-file parameters. Zero means "derive from the pool size":
// nlist = round(sqrt(n)), nprobe = ceil(0.8 * nlist).
struct IndexParams {
  size_t nlist = 0;
  size_t nprobe = 0;
  int kmeans_iterations = 10;
  size_t kmeans_sample = 16384;
  uint64_t build_seed = 17;
};

struct Neighbor {
  std::string ad_id;
  double similarity = 0.0;
  double pctr = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct QueryOptions {
  size_t k = kDefaultNeighbors;
  double min_sim = kDefaultMinSimilarity;
  std::optional<std::string> exclude;
};

// Immutable store of unit vectors and precomputed pCTRs with an exact scan
// and a clustered inverted-file (spherical k-means) candidate generator.
class AdIndex {
 public:
  static constexpr uint32_t kFormatVersion = 1;

  // Embeds every ad's composed text and stores pCTR(text, ad.publisher).
  static AdIndex Build(const AdPool& pool, const EmbeddingProvider& embedder,
                       const PctrProvider& pctr, const IndexParams& params = {});
  // `vectors` is row-major n x d; rows are normalized on the way in.
  static AdIndex FromVectors(std::vector<std::string> ad_ids,
                             std::vector<float> vectors, size_t dimension,
                             std::vector<double> pctrs,
                             const IndexParams& params = {});

  // Full scan. Similarity >= min_sim, sorted by similarity descending then
  // ad_id ascending, at most k.
  std::vector<Neighbor> QueryExact(std::span<const float> query,
                                   const QueryOptions& options) const;
  // Same contract, candidates drawn from the nprobe closest lists only.
  // Returned similarities are exact.
  std::vector<Neighbor> QueryApprox(std::span<const float> query,
                                    const QueryOptions& options) const;

  size_t size() const { return ad_ids_.size(); }
  size_t dimension() const { return dimension_; }
  size_t nlist() const { return centroids_.size() / std::max<size_t>(dimension_, 1); }
  size_t nprobe() const { return nprobe_; }
  uint64_t build_seed() const { return build_seed_; }
  const std::vector<std::string>& ad_ids() const { return ad_ids_; }
  const std::vector<double>& pctrs() const { return pctrs_; }
  std::span<const float> Row(size_t row) const;
  std::optional<size_t> RowOf(std::string_view ad_id) const;

  // Stable hex digest of the vectors and the inverted-file structure.
  std::string Digest() const;

  void Save(const std::filesystem::path& path) const;
  static AdIndex Load(const std::filesystem::path& path);

 private:
  AdIndex() = default;
  void BuildInvertedFile(const IndexParams& params);
  void BuildLists(const std::vector<uint32_t>& assignment);
  void IndexIds();

  size_t dimension_ = 0;
  uint64_t build_seed_ = 0;
  std::vector<std::string> ad_ids_;
  std::vector<float> vectors_;
  std::vector<double> pctrs_;
  std::unordered_map<std::string, size_t> row_of_;

  size_t nprobe_ = 1;
  std::vector<float> centroids_;
  std::vector<uint32_t> assignment_;
  // Rows grouped by list; list_offsets_ has nlist + 1 entries.
  std::vector<uint32_t> list_rows_;
  std::vector<size_t> list_offsets_;
  std::vector<float> list_vectors_;
};

// Mean over queries of |approx top-k intersect exact top-k| / min(k, n),
// with min_sim = -1.
double RecallAtK(const AdIndex& index, std::span<const Embedding> queries, size_t k);

}  // namespace adstrength

#endif  // ADSTRENGTH_ANNINDEX_H_
