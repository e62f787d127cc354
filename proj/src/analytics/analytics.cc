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

#include "geopool/analytics/analytics.h"

#include <algorithm>
#include <numeric>

#include "geopool/error.h"

namespace geopool::analytics {

namespace {

std::string MatrixKey(const geo::GeoDesignation& d) {
  std::string key = d.country();
  if (d.province()) key += "/" + *d.province();
  if (d.city()) key += "/" + *d.city();
  return key;
}

const std::vector<int32_t>& LevelOf(const ReportMatrix& m, geo::Resolution r) {
  switch (r) {
    case geo::Resolution::kCountry:
      return m.country;
    case geo::Resolution::kProvince:
      return m.province;
    case geo::Resolution::kCity:
      return m.city;
  }
  throw InternalError("bad resolution");
}

std::vector<uint32_t> DenseTagsOf(const survey::Catalog& catalog,
                                  const survey::Question& q,
                                  std::vector<std::string>& ids) {
  std::vector<uint32_t> dense;
  for (const auto& t : q.tags) {
    dense.push_back(catalog.FindTag(t.tag_id)->dense);
    ids.push_back(t.tag_id);
  }
  return dense;
}

}  // namespace

double CooccurrenceTable::RowPercent(size_t a, size_t b) const {
  if (row_totals[a] == 0) return 0.0;
  return 100.0 * static_cast<double>(cells[a][b]) /
         static_cast<double>(row_totals[a]);
}

DistributionSummary DistributionSummary::FromHistogram(
    std::span<const uint64_t> hist) {
  DistributionSummary s;
  s.histogram.assign(hist.begin(), hist.end());
  s.count = std::accumulate(hist.begin(), hist.end(), uint64_t{0});
  if (s.count == 0) return s;

  long double sum = 0;
  uint64_t cum = 0;
  for (size_t v = 0; v < hist.size(); ++v) {
    if (hist[v] == 0) continue;
    sum += static_cast<long double>(v) * hist[v];
    cum += hist[v];
    s.cdf.emplace_back(v, static_cast<double>(cum) / s.count);
  }
  s.mean = static_cast<double>(sum / s.count);

  for (int p : {50, 90, 99}) {
    // Smallest value whose cumulative count reaches ceil(p/100 * n).
    const uint64_t rank = (static_cast<uint64_t>(p) * s.count + 99) / 100;
    uint64_t seen = 0;
    for (size_t v = 0; v < hist.size(); ++v) {
      seen += hist[v];
      if (seen >= rank) {
        s.percentiles[p] = v;
        break;
      }
    }
  }
  return s;
}

double DistributionSummary::FractionAbove(uint64_t x) const {
  if (count == 0) return 0.0;
  uint64_t above = 0;
  for (size_t v = x + 1; v < histogram.size(); ++v) above += histogram[v];
  return static_cast<double>(above) / count;
}

Analyzer::Analyzer(std::span<const survey::PublicReport> reports,
                   const survey::Catalog& catalog, Exec exec)
    : catalog_(catalog),
      matrix_(ReportMatrix::Build(reports, catalog)),
      exec_(exec) {}

ReportMask Analyzer::WithinMask(const geo::GeoDesignation& d) const {
  const auto& level = LevelOf(matrix_, d.resolution());
  const int32_t id = matrix_.FindPlace(MatrixKey(d));
  ReportMask mask(matrix_.size(), 0);
  if (id == kNone) return mask;
  for (size_t r = 0; r < matrix_.size(); ++r) mask[r] = level[r] == id;
  return mask;
}

std::map<std::string, uint64_t> Analyzer::TagCounts(
    const TagFilter& filter) const {
  std::optional<uint32_t> survey;
  if (filter.survey_id) {
    const auto* s = catalog_.FindSurvey(*filter.survey_id);
    if (s == nullptr) {
      throw NotFoundError("unknown survey '" + *filter.survey_id + "'");
    }
    survey = static_cast<uint32_t>(s - catalog_.surveys().data());
  }
  ReportMask mask;
  if (filter.within) mask = WithinMask(*filter.within);

  auto hist = TagHistogram(matrix_, mask, exec_);
  std::map<std::string, uint64_t> out;
  for (uint32_t t = 0; t < hist.size(); ++t) {
    if (hist[t] == 0) continue;
    if (survey && matrix_.tag_survey[t] != *survey) continue;
    out.emplace(catalog_.tag_by_dense(t).tag_id, hist[t]);
  }
  return out;
}

CooccurrenceTable Analyzer::Cooccurrence(const std::string& qa,
                                         const std::string& qb) const {
  if (qa == qb) {
    throw InvalidArgumentError("co-occurrence needs two distinct questions");
  }
  const auto* a = catalog_.FindQuestion(qa);
  const auto* b = catalog_.FindQuestion(qb);
  if (a == nullptr) throw NotFoundError("unknown question '" + qa + "'");
  if (b == nullptr) throw NotFoundError("unknown question '" + qb + "'");

  CooccurrenceTable t;
  t.question_a = qa;
  t.question_b = qb;
  auto da = DenseTagsOf(catalog_, *a, t.tags_a);
  auto db = DenseTagsOf(catalog_, *b, t.tags_b);
  auto counts = CountPairs(matrix_, da, db, exec_);
  t.base = counts.base;
  t.row_totals = std::move(counts.row_totals);
  t.cells.resize(da.size());
  for (size_t i = 0; i < da.size(); ++i) {
    t.cells[i].assign(counts.cells.begin() + i * db.size(),
                      counts.cells.begin() + (i + 1) * db.size());
  }
  return t;
}

DistributionSummary Analyzer::TagsPerReport() const {
  if (matrix_.size() == 0) return {};
  return DistributionSummary::FromHistogram(LengthHistogram(matrix_, exec_));
}

std::map<uint32_t, uint64_t> Analyzer::SurveysPerReport() const {
  auto hist = SurveyHistogram(matrix_, exec_);
  std::map<uint32_t, uint64_t> out;
  for (uint32_t n = 0; n < hist.size(); ++n) {
    if (hist[n] != 0) out.emplace(n, hist[n]);
  }
  return out;
}

std::vector<PlaceCount> Analyzer::GeographyCounts(
    geo::Resolution level,
    const std::optional<geo::GeoDesignation>& within) const {
  ReportMask mask;
  std::string prefix;
  if (within) {
    if (within->resolution() >= level) {
      throw InvalidArgumentError(
          "cannot count " + std::string(geo::ResolutionName(level)) +
          " within a " + std::string(geo::ResolutionName(within->resolution())));
    }
    mask = WithinMask(*within);
    prefix = MatrixKey(*within) + "/";
  }
  auto hist = PlaceHistogram(matrix_, LevelOf(matrix_, level), mask, exec_);
  std::vector<PlaceCount> rows;
  for (size_t id = 0; id < hist.size(); ++id) {
    if (hist[id] == 0) continue;
    // Path below `within`, so same-named places under different parents
    // stay apart.
    rows.push_back({matrix_.place_keys[id].substr(prefix.size()), hist[id]});
  }
  std::sort(rows.begin(), rows.end(),
            [](const PlaceCount& x, const PlaceCount& y) {
              if (x.count != y.count) return x.count > y.count;
              return x.name < y.name;
            });
  return rows;
}

std::vector<uint64_t> GeometricNull(uint32_t n_max, uint64_t total) {
  if (n_max < 1 || n_max > 62) {
    throw InvalidArgumentError("n_max must be in [1, 62]");
  }
  using u128 = unsigned __int128;
  // count(n) = total * 2^(n_max - n) / (2^n_max - 1).
  const u128 denom = (u128{1} << n_max) - 1;
  std::vector<uint64_t> counts(n_max);
  std::vector<std::pair<u128, uint32_t>> remainders;
  uint64_t assigned = 0;
  for (uint32_t n = 1; n <= n_max; ++n) {
    const u128 num = u128{total} << (n_max - n);
    counts[n - 1] = static_cast<uint64_t>(num / denom);
    assigned += counts[n - 1];
    remainders.emplace_back(num % denom, n);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& x, const auto& y) {
              if (x.first != y.first) return x.first > y.first;
              return x.second < y.second;
            });
  for (uint64_t i = 0; assigned < total; ++i, ++assigned) {
    ++counts[remainders[i].second - 1];
  }
  return counts;
}

nlohmann::json ToJson(const CooccurrenceTable& t) {
  nlohmann::json j = {{"question_a", t.question_a},
                      {"question_b", t.question_b},
                      {"tags_a", t.tags_a},
                      {"tags_b", t.tags_b},
                      {"cells", t.cells},
                      {"row_totals", t.row_totals},
                      {"base", t.base}};
  nlohmann::json pct = nlohmann::json::array();
  for (size_t a = 0; a < t.tags_a.size(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (size_t b = 0; b < t.tags_b.size(); ++b) row.push_back(t.RowPercent(a, b));
    pct.push_back(std::move(row));
  }
  j["row_percent"] = std::move(pct);
  return j;
}

nlohmann::json ToJson(const DistributionSummary& s) {
  nlohmann::json j = {{"count", s.count}};
  j["mean"] = s.mean ? nlohmann::json(*s.mean) : nlohmann::json(nullptr);
  j["cdf"] = nlohmann::json::array();
  for (const auto& [v, f] : s.cdf) j["cdf"].push_back({v, f});
  j["percentiles"] = nlohmann::json::object();
  for (const auto& [p, v] : s.percentiles) {
    j["percentiles"]["p" + std::to_string(p)] = v;
  }
  return j;
}

nlohmann::json ToJson(const std::vector<PlaceCount>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) j.push_back({{"name", r.name}, {"count", r.count}});
  return j;
}

}  // namespace geopool::analytics
