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

#include "geopool/release/policy.h"

#include "geopool/error.h"

namespace geopool::release {

namespace {

int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

uint32_t PositiveK(const nlohmann::json& v, const char* name) {
  if (!v.is_number_integer() || v.get<int64_t>() < 1) {
    throw InvalidArgumentError(std::string(name) + " must be an integer >= 1");
  }
  return v.get<uint32_t>();
}

}  // namespace

uint32_t ReleasePolicy::KFor(geo::Resolution r) const {
  switch (r) {
    case geo::Resolution::kCountry:
      return k_country;
    case geo::Resolution::kProvince:
      return k_province;
    case geo::Resolution::kCity:
      return k_city;
  }
  return k_country;
}

void ReleasePolicy::Validate() const {
  if (k_country < 1 || k_province < 1 || k_city < 1) {
    throw InvalidArgumentError("k must be >= 1 at every resolution");
  }
  if (granularity.count() <= 0) {
    throw InvalidArgumentError("granularity must be positive");
  }
}

Timestamp ReleasePolicy::Truncate(Timestamp t) const {
  int64_t g = granularity.count();
  int64_t s = t.time_since_epoch().count();
  return Timestamp(std::chrono::seconds(FloorDiv(s, g) * g));
}

int64_t ReleasePolicy::ElapsedUnits(Timestamp since, Timestamp now) const {
  return (Truncate(now) - Truncate(since)) / granularity;
}

ReleasePolicy PolicyFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgumentError("policy must be an object");
  ReleasePolicy p;
  if (j.contains("k")) {
    p.k_country = p.k_province = p.k_city = PositiveK(j["k"], "k");
  }
  if (j.contains("k_country")) p.k_country = PositiveK(j["k_country"], "k_country");
  if (j.contains("k_province")) {
    p.k_province = PositiveK(j["k_province"], "k_province");
  }
  if (j.contains("k_city")) p.k_city = PositiveK(j["k_city"], "k_city");

  if (j.contains("granularity_seconds")) {
    const auto& g = j["granularity_seconds"];
    if (!g.is_number_integer() || g.get<int64_t>() <= 0) {
      throw InvalidArgumentError("granularity_seconds must be a positive integer");
    }
    p.granularity = std::chrono::seconds(g.get<int64_t>());
  } else if (j.contains("granularity")) {
    const auto& g = j["granularity"];
    std::string name = g.is_string() ? g.get<std::string>() : "";
    if (name == "hour") {
      p.granularity = std::chrono::hours(1);
    } else if (name == "day") {
      p.granularity = std::chrono::days(1);
    } else if (name == "week") {
      p.granularity = std::chrono::weeks(1);
    } else {
      throw InvalidArgumentError("granularity must be hour, day or week");
    }
  }
  if (j.contains("escalation_after") && !j["escalation_after"].is_null()) {
    const auto& e = j["escalation_after"];
    if (!e.is_number_integer() || e.get<int64_t>() < 1) {
      throw InvalidArgumentError("escalation_after must be an integer >= 1");
    }
    p.escalation_after = e.get<uint32_t>();
  }
  p.Validate();
  return p;
}

nlohmann::json ToJson(const ReleasePolicy& p) {
  nlohmann::json j = {{"k_country", p.k_country},
                      {"k_province", p.k_province},
                      {"k_city", p.k_city},
                      {"granularity_seconds", p.granularity.count()}};
  j["escalation_after"] =
      p.escalation_after ? nlohmann::json(*p.escalation_after) : nullptr;
  return j;
}

}  // namespace geopool::release
