/*
 * Copyright 2026 The MFGAT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mfgat {

// Deterministic random stream.
//
// Engine: std::mt19937_64 seeded with the 64-bit seed directly. Its output
// sequence is fixed by the C++ standard, so draws are identical across
// compilers and platforms. The std:: distributions are not (their algorithms
// are implementation-defined), so every derived draw below is computed by
// hand from raw 64-bit outputs:
//   uniform01  = (u64 >> 11) * 2^-53
//   bernoulli  = uniform01 < p
//   shuffle    = Fisher-Yates from the back, index = u64 % (i + 1)
// Child streams for independent sub-tasks use splitmix64(seed ^ splitmix64(tag)).
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  // Independent stream keyed by (this seed, tag); does not advance *this.
  RngStream child(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mfgat
