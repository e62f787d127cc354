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

#include "geopool/analytics/report_matrix.h"

#include <algorithm>

#include "geopool/error.h"

namespace geopool::analytics {

int32_t ReportMatrix::Intern(const std::string& key, const std::string& name,
                             int32_t parent) {
  auto [it, inserted] =
      place_index_.emplace(key, static_cast<int32_t>(place_keys.size()));
  if (inserted) {
    place_keys.push_back(key);
    place_names.push_back(name);
    place_parent.push_back(parent);
  }
  return it->second;
}

int32_t ReportMatrix::FindPlace(const std::string& key) const {
  auto it = place_index_.find(key);
  return it == place_index_.end() ? kNone : it->second;
}

ReportMatrix ReportMatrix::Build(std::span<const survey::PublicReport> reports,
                                 const survey::Catalog& catalog) {
  ReportMatrix m;
  m.survey_count = catalog.surveys().size();
  m.tag_survey.resize(catalog.tag_count());
  for (uint32_t i = 0; i < catalog.tag_count(); ++i) {
    m.tag_survey[i] = catalog.ref_by_dense(i).survey;
  }
  m.offsets.reserve(reports.size() + 1);
  m.country.reserve(reports.size());
  m.province.reserve(reports.size());
  m.city.reserve(reports.size());

  for (const auto& r : reports) {
    const size_t start = m.tags.size();
    for (const auto& id : r.selections) {
      const auto* ref = catalog.FindTag(id);
      if (ref == nullptr) throw NotFoundError("unknown tag '" + id + "'");
      m.tags.push_back(ref->dense);
    }
    std::sort(m.tags.begin() + start, m.tags.end());
    m.tags.erase(std::unique(m.tags.begin() + start, m.tags.end()),
                 m.tags.end());
    m.offsets.push_back(m.tags.size());

    const auto& d = r.designation;
    std::string key = d.country();
    const int32_t c = m.Intern(key, d.country(), kNone);
    int32_t p = kNone, ci = kNone;
    if (d.province()) {
      key += "/" + *d.province();
      p = m.Intern(key, *d.province(), c);
    }
    if (d.city()) {
      key += "/" + *d.city();
      ci = m.Intern(key, *d.city(), p);
    }
    m.country.push_back(c);
    m.province.push_back(p);
    m.city.push_back(ci);
  }
  return m;
}

}  // namespace geopool::analytics
