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

#ifndef GEOPOOL_RELEASE_REPORT_ID_H_
#define GEOPOOL_RELEASE_REPORT_ID_H_

#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <string>

namespace geopool::release {

// 128-bit random ids rendered as 32 lowercase hex digits. Ids are drawn
// independently, so they say nothing about arrival order. Thread-safe.
class ReportIdGenerator {
 public:
  // Without a seed, draws from std::random_device on every call.
  explicit ReportIdGenerator(std::optional<uint64_t> seed = std::nullopt)
      : seeded_(seed.has_value()), rng_(seed.value_or(0)) {}

  std::string Next() {
    uint64_t hi, lo;
    {
      std::lock_guard lock(mu_);
      if (seeded_) {
        hi = rng_();
        lo = rng_();
      } else {
        hi = (static_cast<uint64_t>(device_()) << 32) | device_();
        lo = (static_cast<uint64_t>(device_()) << 32) | device_();
      }
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id(32, '0');
    for (int i = 0; i < 16; ++i) {
      id[15 - i] = kHex[(hi >> (4 * i)) & 0xf];
      id[31 - i] = kHex[(lo >> (4 * i)) & 0xf];
    }
    return id;
  }

 private:
  std::mutex mu_;
  bool seeded_;
  std::mt19937_64 rng_;
  std::random_device device_;
};

}  // namespace geopool::release

#endif  // GEOPOOL_RELEASE_REPORT_ID_H_
