// Copyright 2026 The evoqa Authors
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

// Seedable random numbers with platform-stable draws. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions below are implemented here so results do not depend on the
// standard library vendor.

#ifndef EVOQA_RNG_HPP_
#define EVOQA_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace evoqa {

std::uint64_t SplitMix64(std::uint64_t x);
// Order-sensitive combination of seed components.
std::uint64_t MixSeed(std::initializer_list<std::uint64_t> parts);
std::uint64_t HashString(std::string_view s);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t Below(std::uint64_t bound);
  bool Bernoulli(double p) { return Uniform() < p; }
  int Binomial(int n, double p);
  // Index drawn with the given probabilities (need not be normalized).
  std::size_t Categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace evoqa

#endif  // EVOQA_RNG_HPP_
