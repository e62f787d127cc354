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

#include "geopool/survey/report.h"

#include <algorithm>
#include <map>

#include "geopool/error.h"

namespace geopool::survey {

ValidationResult ValidateSubmission(const ReportSubmission& sub,
                                    const Catalog& catalog) {
  ValidationResult result;
  if (sub.schema_version != catalog.version()) {
    result.Add("schema_version", "schema version mismatch (expected " +
                                     catalog.version() + ")");
  }
  if (sub.selections.empty()) {
    result.Add("tags", "at least one tag");
    return result;
  }

  // Sorted copy so the outcome never depends on the order we were handed.
  std::vector<std::string> sorted = sub.selections;
  std::sort(sorted.begin(), sorted.end());
  std::map<std::pair<uint32_t, uint32_t>, int> per_question;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      result.Add(sorted[i], "duplicate tag");
      continue;
    }
    const Catalog::TagRef* ref = catalog.FindTag(sorted[i]);
    if (ref == nullptr) {
      result.Add(sorted[i], "unknown tag");
      continue;
    }
    ++per_question[{ref->survey, ref->question}];
  }
  for (const auto& [key, count] : per_question) {
    const Question& q = catalog.surveys()[key.first].questions[key.second];
    if (!q.multi_select && count > 1) {
      result.Add(q.question_id, "single-select question has " +
                                    std::to_string(count) + " selections");
    }
  }
  return result;
}

SubmissionCheck CheckSubmissionPayload(std::string_view body,
                                       const Catalog& catalog) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed submission: ") + e.what());
  }

  SubmissionCheck check;
  ValidationResult& result = check.result;
  if (!doc.is_object()) {
    result.Add("<payload>", "submission must be a JSON object");
    return check;
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "schema_version" && key != "tags" && key != "designation") {
      result.Add(key, "unknown field");
    }
  }

  std::string version;
  if (auto it = doc.find("schema_version"); it != doc.end() && it->is_string()) {
    version = it->get<std::string>();
  } else {
    result.Add("schema_version", "schema_version must be a string");
  }

  std::vector<std::string> tags;
  auto tags_it = doc.find("tags");
  if (tags_it == doc.end() || !tags_it->is_array()) {
    result.Add("tags", "tags must be an array of tag ids");
  } else {
    for (const auto& t : *tags_it) {
      if (!t.is_string()) {
        result.Add("tags", "tag ids must be strings");
        continue;
      }
      tags.push_back(t.get<std::string>());
    }
  }

  std::optional<geo::GeoDesignation> designation;
  auto d_it = doc.find("designation");
  if (d_it == doc.end()) {
    result.Add("designation", "designation is required");
  } else {
    try {
      designation = geo::DesignationFromJson(*d_it);
    } catch (const Error& e) {
      result.Add("designation", e.what());
    }
  }

  if (!result.ok()) return check;

  std::sort(tags.begin(), tags.end());
  ReportSubmission sub{std::move(tags), std::move(*designation),
                       std::move(version)};
  ValidationResult semantic = ValidateSubmission(sub, catalog);
  if (!semantic.ok()) {
    result = std::move(semantic);
    return check;
  }
  check.submission = std::move(sub);
  return check;
}

nlohmann::json SubmissionToJson(const ReportSubmission& sub) {
  return {{"schema_version", sub.schema_version},
          {"tags", sub.selections},
          {"designation", geo::ToJson(sub.designation)}};
}

std::set<std::string> SurveysInReport(std::span<const std::string> selections,
                                      const Catalog& catalog) {
  std::set<std::string> out;
  for (const auto& tag_id : selections) {
    const Catalog::TagRef* ref = catalog.FindTag(tag_id);
    if (ref == nullptr) throw NotFoundError("unknown tag '" + tag_id + "'");
    out.insert(catalog.surveys()[ref->survey].survey_id);
  }
  return out;
}

}  // namespace geopool::survey
