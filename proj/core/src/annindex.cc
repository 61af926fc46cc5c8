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

#include "adstrength/annindex.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "adstrength/error.h"
#include "adstrength/random.h"

namespace adstrength {
namespace {

constexpr char kMagic[8] = {'A', 'D', 'S', 'I', 'D', 'X', '\0', '\0'};

double Dot(const float* a, const float* b, size_t d) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < d; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return (s0 + s1) + (s2 + s3);
}

float DotFast(const float* a, const float* b, size_t d) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  float s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < d; ++i) s += a[i] * b[i];
  return s;
}

// Bound on |DotFast - Dot| for unit vectors of the dimensions we index.
constexpr float kFastTolerance = 1e-4f;

double Similarity(const float* a, const float* b, size_t d) {
  return std::clamp(Dot(a, b, d), -1.0, 1.0);
}

struct Candidate {
  double similarity;
  uint32_t row;
};

// Bounded selection of the best k candidates under (similarity desc,
// ad_id asc).
class TopK {
 public:
  TopK(size_t k, const std::vector<std::string>& ids) : k_(k), ids_(ids) {
    heap_.reserve(k + 1);
  }

  bool Better(const Candidate& a, const Candidate& b) const {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return ids_[a.row] < ids_[b.row];
  }

  void Offer(const Candidate& c) {
    auto worse_on_top = [this](const Candidate& a, const Candidate& b) {
      return Better(a, b);
    };
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
    } else if (Better(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), worse_on_top);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
    }
  }

  std::vector<Candidate> Sorted() {
    std::sort(heap_.begin(), heap_.end(),
              [this](const Candidate& a, const Candidate& b) { return Better(a, b); });
    return std::move(heap_);
  }

 private:
  size_t k_;
  const std::vector<std::string>& ids_;
  std::vector<Candidate> heap_;
};

void CheckQuery(std::span<const float> query, size_t dimension, const QueryOptions& options) {
  if (options.k == 0) Fail(ErrorKind::kInvalidArgument, "query k must be >= 1");
  if (query.size() != dimension) {
    Fail(ErrorKind::kInvalidArgument, "query dimension " + std::to_string(query.size()) +
                                          " does not match index dimension " +
                                          std::to_string(dimension));
  }
}

// Little-endian primitives for the on-disk format.
void PutU32(std::ostream& out, uint32_t v) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void PutU64(std::ostream& out, uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

void PutF32(std::ostream& out, float v) { PutU32(out, std::bit_cast<uint32_t>(v)); }
void PutF64(std::ostream& out, double v) { PutU64(out, std::bit_cast<uint64_t>(v)); }

uint64_t GetLe(std::istream& in, int width) {
  unsigned char bytes[8] = {};
  if (!in.read(reinterpret_cast<char*>(bytes), width)) {
    Fail(ErrorKind::kParse, "index file is truncated");
  }
  uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  return v;
}

uint32_t GetU32(std::istream& in) { return static_cast<uint32_t>(GetLe(in, 4)); }
uint64_t GetU64(std::istream& in) { return GetLe(in, 8); }
float GetF32(std::istream& in) { return std::bit_cast<float>(GetU32(in)); }
double GetF64(std::istream& in) { return std::bit_cast<double>(GetU64(in)); }

struct Scored {
  float fast;
  uint32_t row;
  const float* vec;
};

// Keeps only rows whose float score is within tolerance of the running
// k-th best float score.
class FastFilter {
 public:
  FastFilter(size_t k, double min_sim)
      : k_(k), floor_(static_cast<float>(min_sim) - kFastTolerance), cutoff_(floor_) {}

  void Offer(float fast, uint32_t row, const float* vec) {
    if (fast < cutoff_) return;
    kept_.push_back({fast, row, vec});
    best_.push(fast);
    if (best_.size() > k_) best_.pop();
    if (best_.size() == k_) cutoff_ = std::max(floor_, best_.top() - kFastTolerance);
  }
  std::vector<Scored>& kept() { return kept_; }

 private:
  size_t k_;
  float floor_;
  float cutoff_;
  std::priority_queue<float, std::vector<float>, std::greater<float>> best_;
  std::vector<Scored> kept_;
};

// Two-pass selection: float scores pick every row that can still reach the
// top k, and those rows are re-scored with the double-precision dot.
void SelectExact(std::vector<Scored>& scored, const float* query, size_t d,
                 const QueryOptions& options, TopK& top) {
  if (scored.size() > options.k) {
    std::nth_element(scored.begin(), scored.begin() + (options.k - 1), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.fast > b.fast; });
    const float cutoff = scored[options.k - 1].fast - kFastTolerance;
    std::erase_if(scored, [cutoff](const Scored& s) { return s.fast < cutoff; });
  }
  for (const auto& s : scored) {
    const double sim = Similarity(query, s.vec, d);
    if (sim >= options.min_sim) top.Offer({sim, s.row});
  }
}

}  // namespace

AdIndex AdIndex::Build(const AdPool& pool, const EmbeddingProvider& embedder,
                       const PctrProvider& pctr, const IndexParams& params) {
  if (pool.empty()) Fail(ErrorKind::kInvalidArgument, "cannot index an empty pool");
  const size_t d = embedder.dimension();
  std::vector<std::string> ids;
  std::vector<float> vectors;
  std::vector<double> pctrs;
  ids.reserve(pool.size());
  vectors.reserve(pool.size() * d);
  pctrs.reserve(pool.size());

  constexpr size_t kChunk = 256;
  const auto& ads = pool.ads();
  for (size_t start = 0; start < ads.size(); start += kChunk) {
    const size_t end = std::min(ads.size(), start + kChunk);
    std::vector<std::string> texts;
    for (size_t i = start; i < end; ++i) texts.push_back(ads[i].Text().full_text);
    std::vector<Embedding> embedded;
    try {
      embedded = embedder.EmbedBatch(texts);
    } catch (const Error&) {
      // Re-run one by one to name the failing ad.
      for (size_t i = start; i < end; ++i) {
        try {
          embedder.Embed(texts[i - start]);
        } catch (const Error& e) {
          Fail(e.kind(), "embedding ad '" + ads[i].ad_id + "': " + e.what());
        }
      }
      throw;
    }
    for (size_t i = start; i < end; ++i) {
      const Embedding& vec = embedded[i - start];
      if (vec.size() != d) {
        Fail(ErrorKind::kMalformedResponse,
             "embedding ad '" + ads[i].ad_id + "': wrong dimension");
      }
      double p;
      try {
        p = pctr.Predict(ads[i].Text(), ads[i].publisher);
      } catch (const Error& e) {
        Fail(e.kind(), "pctr for ad '" + ads[i].ad_id + "': " + e.what());
      }
      ids.push_back(ads[i].ad_id);
      vectors.insert(vectors.end(), vec.begin(), vec.end());
      pctrs.push_back(p);
    }
  }
  return FromVectors(std::move(ids), std::move(vectors), d, std::move(pctrs), params);
}

AdIndex AdIndex::FromVectors(std::vector<std::string> ad_ids, std::vector<float> vectors,
                             size_t dimension, std::vector<double> pctrs,
                             const IndexParams& params) {
  if (ad_ids.empty()) Fail(ErrorKind::kInvalidArgument, "cannot index an empty pool");
  if (dimension == 0) Fail(ErrorKind::kInvalidArgument, "index dimension must be > 0");
  if (vectors.size() != ad_ids.size() * dimension || pctrs.size() != ad_ids.size()) {
    Fail(ErrorKind::kInvalidArgument, "index inputs have inconsistent sizes");
  }
  AdIndex index;
  index.dimension_ = dimension;
  index.build_seed_ = params.build_seed;
  index.ad_ids_ = std::move(ad_ids);
  index.vectors_ = std::move(vectors);
  index.pctrs_ = std::move(pctrs);
  for (float v : index.vectors_) {
    if (!std::isfinite(v)) Fail(ErrorKind::kInvalidArgument, "non-finite vector entry");
  }
  for (size_t row = 0; row < index.size(); ++row) {
    NormalizeInPlace(std::span<float>(index.vectors_.data() + row * dimension, dimension));
  }
  index.IndexIds();
  index.BuildInvertedFile(params);
  return index;
}

void AdIndex::IndexIds() {
  row_of_.clear();
  row_of_.reserve(ad_ids_.size());
  for (size_t row = 0; row < ad_ids_.size(); ++row) {
    if (!row_of_.emplace(ad_ids_[row], row).second) {
      Fail(ErrorKind::kInvalidArgument, "duplicate ad_id '" + ad_ids_[row] + "' in index");
    }
  }
}

void AdIndex::BuildInvertedFile(const IndexParams& params) {
  const size_t n = size();
  const size_t d = dimension_;
  size_t nlist = params.nlist;
  if (nlist == 0) nlist = static_cast<size_t>(std::lround(std::sqrt(static_cast<double>(n))));
  nlist = std::clamp<size_t>(nlist, 1, n);
  nprobe_ = params.nprobe;
  if (nprobe_ == 0) nprobe_ = std::max<size_t>(1, (nlist * 4 + 4) / 5);
  nprobe_ = std::min(nprobe_, nlist);

  Rng rng(params.build_seed);
  std::vector<uint32_t> sample(n);
  std::iota(sample.begin(), sample.end(), 0u);
  const size_t sample_size = std::min(n, std::max(params.kmeans_sample, nlist));
  for (size_t i = 0; i < sample_size; ++i) {
    std::swap(sample[i], sample[i + rng.Below(n - i)]);
  }
  sample.resize(sample_size);
  std::sort(sample.begin(), sample.end());

  // k-means++ seeding on 1 - cosine.
  centroids_.assign(nlist * d, 0.0f);
  std::vector<double> best_sim(sample_size, -std::numeric_limits<double>::infinity());
  size_t first = rng.Below(sample_size);
  std::copy_n(&vectors_[sample[first] * d], d, &centroids_[0]);
  for (size_t c = 1; c <= nlist; ++c) {
    const float* centroid = &centroids_[(c - 1) * d];
    double total = 0.0;
    for (size_t i = 0; i < sample_size; ++i) {
      best_sim[i] = std::max(best_sim[i], Dot(&vectors_[sample[i] * d], centroid, d));
      total += std::max(0.0, 1.0 - best_sim[i]);
    }
    if (c == nlist) break;
    size_t pick = rng.Below(sample_size);
    if (total > 0) {
      double target = rng.Uniform() * total;
      for (size_t i = 0; i < sample_size; ++i) {
        target -= std::max(0.0, 1.0 - best_sim[i]);
        if (target < 0) {
          pick = i;
          break;
        }
      }
    }
    std::copy_n(&vectors_[sample[pick] * d], d, &centroids_[c * d]);
  }

  auto nearest = [&](const float* v) {
    uint32_t best = 0;
    float best_dot = -std::numeric_limits<float>::infinity();
    for (size_t c = 0; c < nlist; ++c) {
      const float dot = DotFast(v, &centroids_[c * d], d);
      if (dot > best_dot) {
        best_dot = dot;
        best = static_cast<uint32_t>(c);
      }
    }
    return std::pair{best, best_dot};
  };

  std::vector<uint32_t> sample_assignment(sample_size, 0);
  std::vector<double> sums(nlist * d);
  std::vector<size_t> counts(nlist);
  for (int iter = 0; iter < params.kmeans_iterations; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    size_t worst = 0;
    float worst_dot = std::numeric_limits<float>::infinity();
    for (size_t i = 0; i < sample_size; ++i) {
      const float* v = &vectors_[sample[i] * d];
      const auto [c, dot] = nearest(v);
      sample_assignment[i] = c;
      ++counts[c];
      for (size_t j = 0; j < d; ++j) sums[c * d + j] += v[j];
      if (dot < worst_dot) {
        worst_dot = dot;
        worst = i;
      }
    }
    for (size_t c = 0; c < nlist; ++c) {
      float* centroid = &centroids_[c * d];
      if (counts[c] == 0) {
        // Re-seed an empty list with the worst-served sample point.
        std::copy_n(&vectors_[sample[worst] * d], d, centroid);
        continue;
      }
      for (size_t j = 0; j < d; ++j) centroid[j] = static_cast<float>(sums[c * d + j]);
      NormalizeInPlace(std::span<float>(centroid, d));
    }
  }

  std::vector<uint32_t> assignment(n);
  for (size_t row = 0; row < n; ++row) assignment[row] = nearest(&vectors_[row * d]).first;
  BuildLists(assignment);
}

void AdIndex::BuildLists(const std::vector<uint32_t>& assignment) {
  const size_t nlist_count = nlist();
  const size_t d = dimension_;
  assignment_ = assignment;
  list_offsets_.assign(nlist_count + 1, 0);
  for (uint32_t c : assignment_) ++list_offsets_[c + 1];
  std::partial_sum(list_offsets_.begin(), list_offsets_.end(), list_offsets_.begin());
  list_rows_.assign(size(), 0);
  std::vector<size_t> cursor(list_offsets_.begin(), list_offsets_.end() - 1);
  for (uint32_t row = 0; row < size(); ++row) list_rows_[cursor[assignment_[row]]++] = row;
  list_vectors_.resize(size() * d);
  for (size_t i = 0; i < list_rows_.size(); ++i) {
    std::copy_n(&vectors_[list_rows_[i] * d], d, &list_vectors_[i * d]);
  }
}

std::span<const float> AdIndex::Row(size_t row) const {
  return {vectors_.data() + row * dimension_, dimension_};
}

std::optional<size_t> AdIndex::RowOf(std::string_view ad_id) const {
  auto it = row_of_.find(std::string(ad_id));
  if (it == row_of_.end()) return std::nullopt;
  return it->second;
}

std::vector<Neighbor> AdIndex::QueryExact(std::span<const float> query,
                                          const QueryOptions& options) const {
  CheckQuery(query, dimension_, options);
  const std::optional<size_t> excluded =
      options.exclude ? RowOf(*options.exclude) : std::nullopt;
  FastFilter filter(options.k, options.min_sim);
  for (size_t row = 0; row < size(); ++row) {
    if (excluded && *excluded == row) continue;
    const float* vec = &vectors_[row * dimension_];
    filter.Offer(DotFast(query.data(), vec, dimension_), static_cast<uint32_t>(row), vec);
  }
  TopK top(options.k, ad_ids_);
  SelectExact(filter.kept(), query.data(), dimension_, options, top);
  std::vector<Neighbor> out;
  for (const auto& c : top.Sorted()) out.push_back({ad_ids_[c.row], c.similarity, pctrs_[c.row]});
  return out;
}

std::vector<Neighbor> AdIndex::QueryApprox(std::span<const float> query,
                                           const QueryOptions& options) const {
  CheckQuery(query, dimension_, options);
  const size_t d = dimension_;
  const size_t lists = nlist();
  std::vector<std::pair<float, uint32_t>> ranked(lists);
  for (size_t c = 0; c < lists; ++c) {
    ranked[c] = {DotFast(query.data(), &centroids_[c * d], d), static_cast<uint32_t>(c)};
  }
  const size_t probes = std::min(nprobe_, lists);
  std::partial_sort(ranked.begin(), ranked.begin() + probes, ranked.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  const std::optional<size_t> excluded =
      options.exclude ? RowOf(*options.exclude) : std::nullopt;
  FastFilter filter(options.k, options.min_sim);
  for (size_t p = 0; p < probes; ++p) {
    const uint32_t list = ranked[p].second;
    for (size_t i = list_offsets_[list]; i < list_offsets_[list + 1]; ++i) {
      const uint32_t row = list_rows_[i];
      if (excluded && *excluded == row) continue;
      const float* vec = &list_vectors_[i * d];
      filter.Offer(DotFast(query.data(), vec, d), row, vec);
    }
  }
  TopK top(options.k, ad_ids_);
  SelectExact(filter.kept(), query.data(), d, options, top);
  std::vector<Neighbor> out;
  for (const auto& c : top.Sorted()) out.push_back({ad_ids_[c.row], c.similarity, pctrs_[c.row]});
  return out;
}

std::string AdIndex::Digest() const {
  uint64_t hash = Fnv1a64(std::to_string(size()) + ":" + std::to_string(dimension_) +
                          ":" + std::to_string(nprobe_));
  for (const auto& id : ad_ids_) hash = Fnv1a64(id + '\x1f', hash);
  const auto bytes = [](const auto& vec) {
    return std::span<const unsigned char>(
        reinterpret_cast<const unsigned char*>(vec.data()),
        vec.size() * sizeof(vec[0]));
  };
  hash = Fnv1a64(bytes(pctrs_), hash);
  hash = Fnv1a64(bytes(vectors_), hash);
  hash = Fnv1a64(bytes(centroids_), hash);
  hash = Fnv1a64(bytes(assignment_), hash);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void AdIndex::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  PutU32(out, kFormatVersion);
  PutU64(out, size());
  PutU32(out, static_cast<uint32_t>(dimension_));
  PutU64(out, build_seed_);
  for (const auto& id : ad_ids_) {
    PutU32(out, static_cast<uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (double p : pctrs_) PutF64(out, p);
  for (float v : vectors_) PutF32(out, v);
  PutU32(out, static_cast<uint32_t>(nlist()));
  PutU32(out, static_cast<uint32_t>(nprobe_));
  for (float v : centroids_) PutF32(out, v);
  for (uint32_t c : assignment_) PutU32(out, c);
  if (!out) Fail(ErrorKind::kIo, "failed writing " + path.string());
}

AdIndex AdIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorKind::kParse, path.string() + " is not an index file");
  }
  const uint32_t version = GetU32(in);
  if (version != kFormatVersion) {
    Fail(ErrorKind::kParse, "unsupported index version " + std::to_string(version));
  }
  AdIndex index;
  const uint64_t n = GetU64(in);
  index.dimension_ = GetU32(in);
  index.build_seed_ = GetU64(in);
  if (n == 0 || index.dimension_ == 0) Fail(ErrorKind::kParse, "empty index file");
  index.ad_ids_.resize(n);
  for (auto& id : index.ad_ids_) {
    const uint32_t len = GetU32(in);
    id.resize(len);
    if (!in.read(id.data(), len)) Fail(ErrorKind::kParse, "index file is truncated");
  }
  index.pctrs_.resize(n);
  for (double& p : index.pctrs_) p = GetF64(in);
  index.vectors_.resize(n * index.dimension_);
  for (float& v : index.vectors_) v = GetF32(in);
  const uint32_t nlist = GetU32(in);
  index.nprobe_ = GetU32(in);
  if (nlist == 0 || nlist > n) Fail(ErrorKind::kParse, "index file has a bad list count");
  index.centroids_.resize(static_cast<size_t>(nlist) * index.dimension_);
  for (float& v : index.centroids_) v = GetF32(in);
  std::vector<uint32_t> assignment(n);
  for (uint32_t& c : assignment) {
    c = GetU32(in);
    if (c >= nlist) Fail(ErrorKind::kParse, "index file has a bad list assignment");
  }
  index.IndexIds();
  index.BuildLists(assignment);
  return index;
}

double RecallAtK(const AdIndex& index, std::span<const Embedding> queries, size_t k) {
  if (queries.empty()) Fail(ErrorKind::kInvalidArgument, "recall needs at least one query");
  const QueryOptions options{k, -1.0, std::nullopt};
  const double denominator = static_cast<double>(std::min(k, index.size()));
  double total = 0.0;
  for (const auto& q : queries) {
    const auto exact = index.QueryExact(q, options);
    const auto approx = index.QueryApprox(q, options);
    std::unordered_set<std::string_view> truth;
    for (const auto& nb : exact) truth.insert(nb.ad_id);
    size_t hits = 0;
    for (const auto& nb : approx) hits += truth.contains(nb.ad_id);
    total += static_cast<double>(hits) / denominator;
  }
  return total / static_cast<double>(queries.size());
}

}  // namespace adstrength
