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

#ifndef GEOPOOL_GEO_DESIGNATION_H_
#define GEOPOOL_GEO_DESIGNATION_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace geopool::geo {

// Ordered coarse to fine, so `a < b` means a is coarser than b.
enum class Resolution { kCountry = 0, kProvince = 1, kCity = 2 };

std::string_view ResolutionName(Resolution r);
// Accepts "country", "province", "city". Throws kInvalidArgument otherwise.
Resolution ParseResolution(std::string_view name);

// Lowercases ASCII, trims and collapses whitespace. Rejects empty names, names
// longer than 64 bytes, digits, and punctuation other than `-`, `'` and `.`,
// so a designation field cannot carry numbers or prose.
std::string NormalizePlaceName(std::string_view raw);

// A country / province / city path at a chosen resolution. Levels finer than
// the resolution are always absent. Names are stored normalized.
class GeoDesignation {
 public:
  // Resolution is implied by the deepest level present. Throws
  // kInvalidArgument if a city is given without a province or a name fails
  // NormalizePlaceName.
  static GeoDesignation Make(std::string_view country,
                             std::optional<std::string_view> province = {},
                             std::optional<std::string_view> city = {});

  const std::string& country() const { return country_; }
  const std::optional<std::string>& province() const { return province_; }
  const std::optional<std::string>& city() const { return city_; }
  Resolution resolution() const { return resolution_; }

  // Unique pool key, e.g. "city:usa/indiana/bloomington".
  std::string Key() const;
  std::string ToString() const;

  friend bool operator==(const GeoDesignation&, const GeoDesignation&) = default;
  friend auto operator<=>(const GeoDesignation&, const GeoDesignation&) = default;

 private:
  GeoDesignation() = default;

  std::string country_;
  std::optional<std::string> province_;
  std::optional<std::string> city_;
  Resolution resolution_ = Resolution::kCountry;
};

// Drops the levels finer than `r`. Throws kFailedPrecondition if `r` is finer
// than the designation (precision cannot be invented).
GeoDesignation Coarsen(const GeoDesignation& d, Resolution r);

// One level coarser, or nullopt at country resolution.
std::optional<GeoDesignation> Parent(const GeoDesignation& d);

// {"country": ..., "province": ... | null, "city": ... | null,
//  "resolution": "country" | "province" | "city"}
nlohmann::json ToJson(const GeoDesignation& d);

// Strict inverse of ToJson: unknown keys, non-string names, levels present
// beyond the stated resolution, or a resolution that disagrees with the
// levels present all throw kInvalidArgument. Absent and null are equivalent.
GeoDesignation DesignationFromJson(const nlohmann::json& j);

}  // namespace geopool::geo

#endif  // GEOPOOL_GEO_DESIGNATION_H_
