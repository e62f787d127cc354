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

// Aggregate statistics over released reports. Everything here is a pure
// function of the public report set: the same reports, whether read from a
// live store or from an export, give the same numbers.

#ifndef GEOPOOL_ANALYTICS_ANALYTICS_H_
#define GEOPOOL_ANALYTICS_ANALYTICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geopool/analytics/kernels.h"
#include "geopool/analytics/report_matrix.h"
#include "geopool/geo/designation.h"
#include "json.hpp"

namespace geopool::analytics {

struct TagFilter {
  // Keep reports at this designation or anywhere under it.
  std::optional<geo::GeoDesignation> within;
  // Count only this survey's tags.
  std::optional<std::string> survey_id;
};

struct CooccurrenceTable {
  std::string question_a, question_b;
  std::vector<std::string> tags_a, tags_b;  // catalog order
  std::vector<std::vector<uint64_t>> cells;  // [a][b]
  // Reports with tag a and at least one tag of question_b.
  std::vector<uint64_t> row_totals;
  // Reports with at least one tag from each question.
  uint64_t base = 0;

  // 100 * cells[a][b] / row_totals[a]; 0 for an empty row.
  double RowPercent(size_t a, size_t b) const;
};

struct DistributionSummary {
  uint64_t count = 0;
  std::vector<uint64_t> histogram;  // histogram[v] = reports with value v
  // (value, fraction of reports <= value) at every observed value.
  std::vector<std::pair<uint64_t, double>> cdf;
  std::optional<double> mean;  // unset for empty input
  // Nearest-rank percentiles 50, 90, 99; empty for empty input.
  std::map<int, uint64_t> percentiles;

  double FractionAbove(uint64_t x) const;

  static DistributionSummary FromHistogram(std::span<const uint64_t> hist);
};

struct PlaceCount {
  std::string name;
  uint64_t count = 0;
  friend bool operator==(const PlaceCount&, const PlaceCount&) = default;
};

// Analytics over one snapshot of public reports. Read-only after
// construction and safe to share across threads.
class Analyzer {
 public:
  Analyzer(std::span<const survey::PublicReport> reports,
           const survey::Catalog& catalog, Exec exec = Exec::kParallel);

  size_t report_count() const { return matrix_.size(); }
  const ReportMatrix& matrix() const { return matrix_; }

  // tag id -> number of reports selecting it; zero counts are omitted.
  // Throws kNotFound for an unknown survey id.
  std::map<std::string, uint64_t> TagCounts(const TagFilter& filter = {}) const;

  // Throws kInvalidArgument if qa == qb and kNotFound for unknown questions.
  CooccurrenceTable Cooccurrence(const std::string& qa,
                                 const std::string& qb) const;

  DistributionSummary TagsPerReport() const;

  // n -> reports touching exactly n distinct surveys; zero counts omitted.
  std::map<uint32_t, uint64_t> SurveysPerReport() const;

  // Reports per place name at `level`, descending by count, ties by name.
  // With `within`, only places under it. Reports coarser than `level` are
  // not counted. Throws kInvalidArgument unless `within` is coarser than
  // `level`.
  std::vector<PlaceCount> GeographyCounts(
      geo::Resolution level,
      const std::optional<geo::GeoDesignation>& within = std::nullopt) const;

 private:
  ReportMask WithinMask(const geo::GeoDesignation& d) const;

  const survey::Catalog& catalog_;
  ReportMatrix matrix_;
  Exec exec_;
};

// Expected surveys-per-report counts if each extra survey halves the
// population: count(n) proportional to 2^-n for n = 1..n_max, apportioned
// to integers summing to `total` by largest remainder (ties go to smaller
// n). Element 0 is n = 1. Throws kInvalidArgument if n_max is outside
// [1, 62].
std::vector<uint64_t> GeometricNull(uint32_t n_max, uint64_t total);

nlohmann::json ToJson(const CooccurrenceTable& t);
nlohmann::json ToJson(const DistributionSummary& s);
nlohmann::json ToJson(const std::vector<PlaceCount>& rows);

}  // namespace geopool::analytics

#endif  // GEOPOOL_ANALYTICS_ANALYTICS_H_
