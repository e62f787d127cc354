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

// Counting kernels over a ReportMatrix. Each has a serial reference and an
// OpenMP version; both return identical results (integer counts only).

#ifndef GEOPOOL_ANALYTICS_KERNELS_H_
#define GEOPOOL_ANALYTICS_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "geopool/analytics/report_matrix.h"

namespace geopool::analytics {

enum class Exec { kSerial, kParallel };

// Per-report inclusion mask; empty means every report.
using ReportMask = std::vector<uint8_t>;

// Count of included reports selecting each dense tag.
std::vector<uint64_t> TagHistogram(const ReportMatrix& m,
                                   const ReportMask& mask, Exec exec);

struct PairCounts {
  std::vector<uint64_t> cells;  // row-major, |a| x |b|
  std::vector<uint64_t> row_totals;  // reports with tag a and any tag of b
  uint64_t base = 0;                 // reports with any of a and any of b
};

// `a` and `b` are dense tag ids; they must be disjoint.
PairCounts CountPairs(const ReportMatrix& m, std::span<const uint32_t> a,
                      std::span<const uint32_t> b, Exec exec);

// hist[n] = reports with exactly n selections.
std::vector<uint64_t> LengthHistogram(const ReportMatrix& m, Exec exec);

// hist[n] = reports touching exactly n distinct surveys.
std::vector<uint64_t> SurveyHistogram(const ReportMatrix& m, Exec exec);

// Count of reports per interned place id at one level. `level` holds a
// per-report place id (country, province or city); kNone entries are
// skipped, as are reports excluded by `mask`.
std::vector<uint64_t> PlaceHistogram(const ReportMatrix& m,
                                     std::span<const int32_t> level,
                                     const ReportMask& mask, Exec exec);

}  // namespace geopool::analytics

#endif  // GEOPOOL_ANALYTICS_KERNELS_H_
