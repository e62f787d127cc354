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

#ifndef GEOPOOL_RELEASE_POLICY_H_
#define GEOPOOL_RELEASE_POLICY_H_

#include <chrono>
#include <cstdint>
#include <optional>

#include "geopool/geo/designation.h"
#include "json.hpp"

namespace geopool::release {

using Timestamp = std::chrono::sys_seconds;

struct ReleasePolicy {
  // Threshold per resolution level. A single k sets all three.
  uint32_t k_country = 5;
  uint32_t k_province = 5;
  uint32_t k_city = 5;
  std::chrono::seconds granularity = std::chrono::days(1);
  // Elapsed granularity units after which a pending pool is pushed one level
  // coarser. Unset disables escalation.
  std::optional<uint32_t> escalation_after;

  static ReleasePolicy WithK(uint32_t k) {
    ReleasePolicy p;
    p.k_country = p.k_province = p.k_city = k;
    return p;
  }

  uint32_t KFor(geo::Resolution r) const;

  // Throws kInvalidArgument unless every k >= 1 and granularity > 0.
  void Validate() const;

  // Floors `t` to a multiple of granularity since the epoch.
  Timestamp Truncate(Timestamp t) const;

  // Whole granularity units between the truncations of `since` and `now`.
  int64_t ElapsedUnits(Timestamp since, Timestamp now) const;
};

// Keys: "k" (all levels) or any of "k_country", "k_province", "k_city";
// "granularity_seconds" or "granularity" ("hour" | "day" | "week");
// "escalation_after". Missing keys keep their defaults.
ReleasePolicy PolicyFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ReleasePolicy& p);

}  // namespace geopool::release

#endif  // GEOPOOL_RELEASE_POLICY_H_
