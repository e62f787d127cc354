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

#include "geopool/analytics/kernels.h"

#include <omp.h>

#include <algorithm>

#include "geopool/error.h"

namespace geopool::analytics {

namespace {

// Runs body(r, hist) over every report with a private histogram per thread,
// then sums the histograms. Integer sums, so the result does not depend on
// the schedule.
template <typename Body>
std::vector<uint64_t> Histogram(size_t n, size_t bins, Exec exec, Body body) {
  std::vector<uint64_t> total(bins, 0);
  if (exec == Exec::kSerial) {
    for (size_t r = 0; r < n; ++r) body(r, total);
    return total;
  }
  const auto count = static_cast<int64_t>(n);
#pragma omp parallel
  {
    std::vector<uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
    for (int64_t r = 0; r < count; ++r) body(static_cast<size_t>(r), local);
#pragma omp critical(geopool_histogram_merge)
    for (size_t i = 0; i < bins; ++i) total[i] += local[i];
  }
  return total;
}

bool Included(const ReportMask& mask, size_t r) {
  return mask.empty() || mask[r] != 0;
}

void CheckMask(const ReportMatrix& m, const ReportMask& mask) {
  if (!mask.empty() && mask.size() != m.size()) {
    throw InvalidArgumentError("report mask size does not match report count");
  }
}

}  // namespace

std::vector<uint64_t> TagHistogram(const ReportMatrix& m,
                                   const ReportMask& mask, Exec exec) {
  CheckMask(m, mask);
  return Histogram(m.size(), m.tag_survey.size(), exec,
                   [&](size_t r, std::vector<uint64_t>& h) {
                     if (!Included(mask, r)) return;
                     for (uint32_t t : m.TagsOf(r)) ++h[t];
                   });
}

PairCounts CountPairs(const ReportMatrix& m, std::span<const uint32_t> a,
                      std::span<const uint32_t> b, Exec exec) {
  // Slot of each dense tag in a (>= 0) or b (encoded as -2 - j).
  std::vector<int32_t> slot(m.tag_survey.size(), kNone);
  for (size_t i = 0; i < a.size(); ++i) slot.at(a[i]) = static_cast<int32_t>(i);
  for (size_t j = 0; j < b.size(); ++j) {
    if (slot.at(b[j]) != kNone) {
      throw InvalidArgumentError("co-occurrence tag sets overlap");
    }
    slot[b[j]] = -2 - static_cast<int32_t>(j);
  }
  const size_t na = a.size(), nb = b.size();
  // Layout: cells [0, na*nb), row totals [na*nb, na*nb+na), base last.
  const size_t row0 = na * nb, base_bin = row0 + na;
  auto flat = Histogram(
      m.size(), base_bin + 1, exec, [&](size_t r, std::vector<uint64_t>& h) {
        thread_local std::vector<uint32_t> in_a, in_b;
        in_a.clear();
        in_b.clear();
        for (uint32_t t : m.TagsOf(r)) {
          const int32_t s = slot[t];
          if (s >= 0) {
            in_a.push_back(static_cast<uint32_t>(s));
          } else if (s != kNone) {
            in_b.push_back(static_cast<uint32_t>(-2 - s));
          }
        }
        if (in_a.empty() || in_b.empty()) return;
        ++h[base_bin];
        for (uint32_t i : in_a) {
          ++h[row0 + i];
          for (uint32_t j : in_b) ++h[i * nb + j];
        }
      });
  PairCounts out;
  out.cells.assign(flat.begin(), flat.begin() + row0);
  out.row_totals.assign(flat.begin() + row0, flat.begin() + base_bin);
  out.base = flat[base_bin];
  return out;
}

std::vector<uint64_t> LengthHistogram(const ReportMatrix& m, Exec exec) {
  size_t longest = 0;
  for (size_t r = 0; r < m.size(); ++r) {
    longest = std::max<size_t>(longest, m.offsets[r + 1] - m.offsets[r]);
  }
  return Histogram(m.size(), longest + 1, exec,
                   [&](size_t r, std::vector<uint64_t>& h) {
                     ++h[m.offsets[r + 1] - m.offsets[r]];
                   });
}

std::vector<uint64_t> SurveyHistogram(const ReportMatrix& m, Exec exec) {
  return Histogram(m.size(), m.survey_count + 1, exec,
                   [&](size_t r, std::vector<uint64_t>& h) {
                     thread_local std::vector<uint32_t> seen;
                     seen.clear();
                     for (uint32_t t : m.TagsOf(r)) {
                       seen.push_back(m.tag_survey[t]);
                     }
                     std::sort(seen.begin(), seen.end());
                     ++h[std::unique(seen.begin(), seen.end()) - seen.begin()];
                   });
}

std::vector<uint64_t> PlaceHistogram(const ReportMatrix& m,
                                     std::span<const int32_t> level,
                                     const ReportMask& mask, Exec exec) {
  CheckMask(m, mask);
  if (level.size() != m.size()) {
    throw InvalidArgumentError("place level size does not match report count");
  }
  return Histogram(m.size(), m.place_keys.size(), exec,
                   [&](size_t r, std::vector<uint64_t>& h) {
                     if (!Included(mask, r) || level[r] == kNone) return;
                     ++h[static_cast<size_t>(level[r])];
                   });
}

}  // namespace geopool::analytics
