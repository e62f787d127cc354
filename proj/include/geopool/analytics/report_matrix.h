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

#ifndef GEOPOOL_ANALYTICS_REPORT_MATRIX_H_
#define GEOPOOL_ANALYTICS_REPORT_MATRIX_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geopool/survey/catalog.h"
#include "geopool/survey/report.h"

namespace geopool::analytics {

inline constexpr int32_t kNone = -1;

// Interned, read-only view of a public report set. Report r selects the
// dense tag ids tags[offsets[r] .. offsets[r+1]), sorted ascending.
// Designation components are interned by their full key ("usa/indiana"), so
// equal names under different parents stay distinct.
struct ReportMatrix {
  std::vector<uint64_t> offsets{0};
  std::vector<uint32_t> tags;
  std::vector<int32_t> country;   // per report
  std::vector<int32_t> province;  // per report, kNone below PROVINCE
  std::vector<int32_t> city;      // per report, kNone below CITY

  std::vector<std::string> place_keys;   // interned id -> full key
  std::vector<std::string> place_names;  // interned id -> own component
  std::vector<int32_t> place_parent;     // interned id -> parent id or kNone

  std::vector<uint32_t> tag_survey;  // dense tag -> survey index
  size_t survey_count = 0;

  size_t size() const { return country.size(); }
  std::span<const uint32_t> TagsOf(size_t r) const {
    return {tags.data() + offsets[r], tags.data() + offsets[r + 1]};
  }

  // Throws kNotFound if a report selects a tag absent from `catalog`.
  static ReportMatrix Build(std::span<const survey::PublicReport> reports,
                            const survey::Catalog& catalog);

  // Interned id of `key`, or kNone.
  int32_t FindPlace(const std::string& key) const;

 private:
  int32_t Intern(const std::string& key, const std::string& name,
                 int32_t parent);
  std::unordered_map<std::string, int32_t> place_index_;
};

}  // namespace geopool::analytics

#endif  // GEOPOOL_ANALYTICS_REPORT_MATRIX_H_
