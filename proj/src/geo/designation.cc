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

#include "geopool/geo/designation.h"

#include <cctype>

#include "geopool/error.h"

namespace geopool::geo {

namespace {

constexpr size_t kMaxPlaceNameBytes = 64;

bool IsAllowedByte(unsigned char c) {
  if (c >= 0x80) return true;  // UTF-8 continuation/lead bytes
  return std::isalpha(c) || c == ' ' || c == '-' || c == '\'' || c == '.';
}

std::optional<std::string> OptionalName(const nlohmann::json& j,
                                        const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw InvalidArgumentError(std::string("designation field '") + key +
                               "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view ResolutionName(Resolution r) {
  switch (r) {
    case Resolution::kCountry:
      return "country";
    case Resolution::kProvince:
      return "province";
    case Resolution::kCity:
      return "city";
  }
  return "country";
}

Resolution ParseResolution(std::string_view name) {
  if (name == "country") return Resolution::kCountry;
  if (name == "province") return Resolution::kProvince;
  if (name == "city") return Resolution::kCity;
  throw InvalidArgumentError("unknown resolution '" + std::string(name) + "'");
}

std::string NormalizePlaceName(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (!IsAllowedByte(c)) {
      throw InvalidArgumentError("place name '" + std::string(raw) +
                                 "' contains a disallowed character");
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  if (out.empty()) throw InvalidArgumentError("place name is empty");
  if (out.size() > kMaxPlaceNameBytes) {
    throw InvalidArgumentError("place name exceeds 64 bytes");
  }
  return out;
}

GeoDesignation GeoDesignation::Make(std::string_view country,
                                    std::optional<std::string_view> province,
                                    std::optional<std::string_view> city) {
  if (city && !province) {
    throw InvalidArgumentError("a city designation requires a province");
  }
  GeoDesignation d;
  d.country_ = NormalizePlaceName(country);
  if (province) {
    d.province_ = NormalizePlaceName(*province);
    d.resolution_ = Resolution::kProvince;
  }
  if (city) {
    d.city_ = NormalizePlaceName(*city);
    d.resolution_ = Resolution::kCity;
  }
  return d;
}

std::string GeoDesignation::Key() const {
  std::string key(ResolutionName(resolution_));
  key += ':';
  key += country_;
  if (province_) key += '/' + *province_;
  if (city_) key += '/' + *city_;
  return key;
}

std::string GeoDesignation::ToString() const {
  std::string s = country_;
  if (province_) s += ", " + *province_;
  if (city_) s += ", " + *city_;
  return s;
}

GeoDesignation Coarsen(const GeoDesignation& d, Resolution r) {
  if (r > d.resolution()) {
    throw FailedPreconditionError("cannot refine " + d.Key() + " to " +
                                  std::string(ResolutionName(r)));
  }
  switch (r) {
    case Resolution::kCountry:
      return GeoDesignation::Make(d.country());
    case Resolution::kProvince:
      return GeoDesignation::Make(d.country(), *d.province());
    case Resolution::kCity:
      return d;
  }
  return d;
}

std::optional<GeoDesignation> Parent(const GeoDesignation& d) {
  if (d.resolution() == Resolution::kCountry) return std::nullopt;
  return Coarsen(d, static_cast<Resolution>(static_cast<int>(d.resolution()) - 1));
}

nlohmann::json ToJson(const GeoDesignation& d) {
  nlohmann::json j;
  j["country"] = d.country();
  j["province"] = d.province() ? nlohmann::json(*d.province()) : nullptr;
  j["city"] = d.city() ? nlohmann::json(*d.city()) : nullptr;
  j["resolution"] = std::string(ResolutionName(d.resolution()));
  return j;
}

GeoDesignation DesignationFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgumentError("designation must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "country" && key != "province" && key != "city" &&
        key != "resolution") {
      throw InvalidArgumentError("unknown field '" + key + "' in designation");
    }
  }
  auto country = OptionalName(j, "country");
  if (!country) throw InvalidArgumentError("designation requires a country");
  auto province = OptionalName(j, "province");
  auto city = OptionalName(j, "city");
  auto it = j.find("resolution");
  if (it == j.end() || !it->is_string()) {
    throw InvalidArgumentError("designation requires a resolution string");
  }
  Resolution stated = ParseResolution(it->get<std::string>());

  std::optional<std::string_view> p, c;
  if (province) p = *province;
  if (city) c = *city;
  GeoDesignation d = GeoDesignation::Make(*country, p, c);
  if (d.resolution() != stated) {
    throw InvalidArgumentError(
        "designation levels do not match resolution '" +
        std::string(ResolutionName(stated)) + "'");
  }
  return d;
}

}  // namespace geopool::geo
