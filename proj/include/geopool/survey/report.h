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

#ifndef GEOPOOL_SURVEY_REPORT_H_
#define GEOPOOL_SURVEY_REPORT_H_

#include <chrono>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geopool/geo/designation.h"
#include "geopool/survey/catalog.h"

namespace geopool::survey {

// What a client sends. Holds tag ids and a coarse designation only: there is
// no field a user could type into, and no coordinates.
struct ReportSubmission {
  std::vector<std::string> selections;  // sorted, unique
  geo::GeoDesignation designation;
  std::string schema_version;
};

// A released report. There is deliberately no submission-time field and no
// user identifier; released_at is the batch's truncated release time.
struct PublicReport {
  std::string report_id;                // random, carries no ordering
  std::vector<std::string> selections;  // sorted, unique
  geo::GeoDesignation designation;
  std::chrono::sys_seconds released_at;

  friend bool operator==(const PublicReport&, const PublicReport&) = default;
};

// Semantic checks on an already-parsed submission: non-empty, all tags known,
// single-select questions answered at most once, schema version current.
// Deterministic and insensitive to selection order.
ValidationResult ValidateSubmission(const ReportSubmission& sub,
                                    const Catalog& catalog);

struct SubmissionCheck {
  ValidationResult result;
  std::optional<ReportSubmission> submission;  // set iff result.ok()
};

// Parses and validates the wire payload
//   {"schema_version": "...", "tags": ["tag id", ...], "designation": {...}}
// Any key outside that set, at any level, is a violation ("unknown field"),
// which keeps free text and coordinates out of storage. Throws kParse when
// the body is not JSON at all.
SubmissionCheck CheckSubmissionPayload(std::string_view body,
                                       const Catalog& catalog);

nlohmann::json SubmissionToJson(const ReportSubmission& sub);

// Distinct survey ids owning the selected tags. Throws kNotFound for a tag
// missing from the catalog.
std::set<std::string> SurveysInReport(std::span<const std::string> selections,
                                      const Catalog& catalog);

}  // namespace geopool::survey

#endif  // GEOPOOL_SURVEY_REPORT_H_
