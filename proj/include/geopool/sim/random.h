// Copyright 2026 The Geopool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Portable random draws. The standard distributions are implementation
// defined, so fixtures and simulations draw through these instead to stay
// byte-identical under a seed on every platform.

#ifndef GEOPOOL_SIM_RANDOM_H_
#define GEOPOOL_SIM_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace geopool::sim {

using Rng = std::mt19937_64;

// Uniform in [0, 1).
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [0, n). n > 0.
inline uint64_t UniformInt(Rng& rng, uint64_t n) {
  // Rejection keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline double Exponential(Rng& rng, double rate) {
  return -std::log1p(-Uniform01(rng)) / rate;
}

// Fisher-Yates with UniformInt.
template <typename It>
void Shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<uint64_t>(last - first);
  for (uint64_t i = n; i > 1; --i) {
    std::swap(first[i - 1], first[UniformInt(rng, i)]);
  }
}

}  // namespace geopool::sim

#endif  // GEOPOOL_SIM_RANDOM_H_
