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

// Synthetic public-report fixtures shaped by target marginals.
//
// Spec (JSON):
//   {
//     "total_reports": 8300,
//     "seed": 1,
//     "start_date": "2012-02-14", "span_days": 600,
//     "survey_counts": {"Sexual Activity": 6605, ...},     // by survey name
//     "surveys_per_report": {"1": 6200, "2": 1600, ...},
//     "tags_per_report": {"mean": 16.4, "above": 80, "fraction_above": 0.01},
//     "countries": {
//       "USA": {"count": 7138,
//               "provinces": {"Indiana": {"count": 2907,
//                                         "cities": {"Bloomington": 1400}}}},
//       "Italy": {"count": 289}
//     },
//     "pinned_cooccurrence": {                               // optional
//       "question_a": "sa.relationship", "tag_a": "sa.relationship.casual_encounter",
//       "question_b": "sa.activity",     "tag_b": "sa.activity.anal_sex",
//       "base": 5453, "pair": 392
//     }
//   }
//
// Survey, surveys-per-report, country, province, city and pinned counts are
// met exactly. Reports not covered by a province (or city) count are
// designated at the coarser level. Tags per report follow a discretized
// lognormal truncated to what each report's surveys can hold, calibrated so
// the expected mean and tail fraction hit the targets.

#ifndef GEOPOOL_SIM_FIXTURE_H_
#define GEOPOOL_SIM_FIXTURE_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geopool/survey/catalog.h"
#include "geopool/survey/report.h"
#include "json.hpp"

namespace geopool::sim {

struct PlaceSpec {
  uint64_t count = 0;
  std::map<std::string, PlaceSpec> children;  // provinces, then cities
};

struct PinnedCooccurrence {
  std::string question_a, tag_a, question_b, tag_b;
  uint64_t base = 0;  // reports answering both questions
  uint64_t pair = 0;  // of those, reports selecting both tags
};

struct FixtureSpec {
  uint64_t total_reports = 0;
  uint64_t seed = 1;
  std::chrono::sys_days start_date{};
  uint32_t span_days = 1;
  std::map<std::string, uint64_t> survey_counts;     // by survey name
  std::map<uint32_t, uint64_t> surveys_per_report;  // n -> reports
  double mean_tags = 16.0;
  uint32_t tail_above = 80;
  double tail_fraction = 0.01;
  std::map<std::string, PlaceSpec> countries;
  std::optional<PinnedCooccurrence> pinned;
};

// Throws kParse for malformed JSON or unknown keys.
FixtureSpec ParseFixtureSpec(const nlohmann::json& j);

// Every inconsistency between the spec and itself or the catalog, one
// message each. Empty means the spec can be generated.
std::vector<std::string> CheckFixtureSpec(const FixtureSpec& spec,
                                          const survey::Catalog& catalog);

// Lognormal parameters after calibration, for inspection.
struct TagModel {
  double mu = 0, sigma = 0;
  double expected_mean = 0, expected_tail = 0;
};

struct Fixture {
  std::vector<survey::PublicReport> reports;
  TagModel tag_model;
  // Ground truth kept while generating, for cross-checking analytics.
  std::map<uint32_t, uint64_t> surveys_per_report;
  std::map<std::string, uint64_t> survey_counts;  // by survey id
};

// Deterministic in (spec, catalog). Throws kInvalidArgument listing every
// conflict from CheckFixtureSpec, or kFailedPrecondition if the targets
// cannot be met by this catalog (for example a tail beyond capacity).
Fixture GenerateFixture(const FixtureSpec& spec, const survey::Catalog& catalog);

}  // namespace geopool::sim

#endif  // GEOPOOL_SIM_FIXTURE_H_
