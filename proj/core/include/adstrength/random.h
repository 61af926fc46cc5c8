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

#ifndef ADSTRENGTH_RANDOM_H_
#define ADSTRENGTH_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace adstrength {

// Seeded PRNG with portable derived distributions. std::mt19937_64 output is
// fixed by the standard, but the <random> distributions and std::shuffle are
// not, so everything that needs byte-identical results across standard
// libraries goes through the helpers below.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound), unbiased (rejection on the top range).
  uint64_t Below(uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();

  double Normal();

  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stateless 64-bit mixer, used to derive per-key streams from a seed.
uint64_t SplitMix64(uint64_t x);

uint64_t Fnv1a64(std::span<const unsigned char> bytes,
                 uint64_t basis = 0xcbf29ce484222325ULL);
uint64_t Fnv1a64(std::string_view text, uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace adstrength

#endif  // ADSTRENGTH_RANDOM_H_
