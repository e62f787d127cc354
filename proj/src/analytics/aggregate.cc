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

#include "geopool/analytics/aggregate.h"

#include <charconv>
#include <set>
#include <sstream>

#include "geopool/error.h"

namespace geopool::analytics {

namespace {

void Allow(const AggregateParams& params, std::set<std::string> allowed) {
  for (const auto& [k, v] : params) {
    if (!allowed.contains(k)) {
      throw InvalidArgumentError("unexpected parameter '" + k + "'");
    }
  }
}

std::optional<std::string> Get(const AggregateParams& params,
                               const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::string Require(const AggregateParams& params, const std::string& key) {
  auto v = Get(params, key);
  if (!v || v->empty()) {
    throw InvalidArgumentError("missing parameter '" + key + "'");
  }
  return *v;
}

uint64_t ParseCount(const std::string& key, const std::string& s) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw InvalidArgumentError("parameter '" + key + "' must be a count");
  }
  return v;
}

// country / province / city parameters as a designation, if any.
std::optional<geo::GeoDesignation> Place(const AggregateParams& params) {
  auto country = Get(params, "country");
  auto province = Get(params, "province");
  auto city = Get(params, "city");
  if (!country) {
    if (province || city) {
      throw InvalidArgumentError("province or city given without country");
    }
    return std::nullopt;
  }
  auto view = [](const std::optional<std::string>& s) {
    return s ? std::optional<std::string_view>(*s) : std::nullopt;
  };
  return geo::GeoDesignation::Make(*country, view(province), view(city));
}

nlohmann::json SurveyHistogramJson(const std::map<uint32_t, uint64_t>& hist) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [n, c] : hist) j[std::to_string(n)] = c;
  return j;
}

}  // namespace

const std::vector<std::string>& AggregateNames() {
  static const std::vector<std::string> kNames = {
      "tag-counts",         "cooccurrence",   "tags-per-report",
      "surveys-per-report", "geometric-null", "geography"};
  return kNames;
}

nlohmann::json RunAggregate(const Analyzer& analyzer, std::string_view name,
                            const AggregateParams& params) {
  nlohmann::json j;
  j["aggregate"] = name;
  j["report_count"] = analyzer.report_count();
  if (name == "tag-counts") {
    Allow(params, {"country", "province", "city", "survey"});
    TagFilter filter{Place(params), Get(params, "survey")};
    j["counts"] = analyzer.TagCounts(filter);
  } else if (name == "cooccurrence") {
    Allow(params, {"qa", "qb"});
    j["table"] =
        ToJson(analyzer.Cooccurrence(Require(params, "qa"), Require(params, "qb")));
  } else if (name == "tags-per-report") {
    Allow(params, {"above"});
    const uint64_t above =
        ParseCount("above", Get(params, "above").value_or("80"));
    auto s = analyzer.TagsPerReport();
    j["summary"] = ToJson(s);
    j["above"] = above;
    j["fraction_above"] = s.FractionAbove(above);
  } else if (name == "surveys-per-report") {
    Allow(params, {});
    auto hist = analyzer.SurveysPerReport();
    j["histogram"] = SurveyHistogramJson(hist);
    const uint32_t n_max = hist.empty() ? 1 : hist.rbegin()->first;
    j["geometric_null"] = GeometricNull(n_max, analyzer.report_count());
  } else if (name == "geometric-null") {
    Allow(params, {"n_max", "total"});
    const uint64_t n_max = ParseCount("n_max", Require(params, "n_max"));
    if (n_max > 62) throw InvalidArgumentError("n_max must be in [1, 62]");
    j["counts"] = GeometricNull(static_cast<uint32_t>(n_max),
                                ParseCount("total", Require(params, "total")));
  } else if (name == "geography") {
    Allow(params, {"level", "country", "province"});
    const auto level =
        geo::ParseResolution(Get(params, "level").value_or("country"));
    j["rows"] = ToJson(analyzer.GeographyCounts(level, Place(params)));
  } else {
    throw NotFoundError("unknown aggregate '" + std::string(name) + "'");
  }
  return j;
}

std::string AggregateCsv(std::string_view name, const nlohmann::json& result) {
  std::ostringstream out;
  if (name == "tag-counts") {
    out << "tag_id,count\n";
    for (const auto& [t, n] : result.at("counts").items()) {
      out << t << ',' << n.get<uint64_t>() << '\n';
    }
  } else if (name == "cooccurrence") {
    const auto& t = result.at("table");
    out << "tag_a,tag_b,count,row_percent\n";
    for (size_t a = 0; a < t.at("tags_a").size(); ++a) {
      for (size_t b = 0; b < t.at("tags_b").size(); ++b) {
        out << t["tags_a"][a].get<std::string>() << ','
            << t["tags_b"][b].get<std::string>() << ','
            << t["cells"][a][b].get<uint64_t>() << ','
            << t["row_percent"][a][b].get<double>() << '\n';
      }
    }
  } else if (name == "tags-per-report") {
    out << "tags,cumulative_fraction\n";
    for (const auto& p : result.at("summary").at("cdf")) {
      out << p[0].get<uint64_t>() << ',' << p[1].get<double>() << '\n';
    }
  } else if (name == "surveys-per-report") {
    out << "surveys,count,geometric_null\n";
    const auto& null = result.at("geometric_null");
    for (size_t i = 0; i < null.size(); ++i) {
      const std::string n = std::to_string(i + 1);
      const auto& hist = result.at("histogram");
      out << n << ',' << (hist.contains(n) ? hist[n].get<uint64_t>() : 0)
          << ',' << null[i].get<uint64_t>() << '\n';
    }
  } else if (name == "geometric-null") {
    out << "surveys,count\n";
    const auto& c = result.at("counts");
    for (size_t i = 0; i < c.size(); ++i) {
      out << i + 1 << ',' << c[i].get<uint64_t>() << '\n';
    }
  } else if (name == "geography") {
    out << "name,count\n";
    for (const auto& r : result.at("rows")) {
      out << r.at("name").get<std::string>() << ','
          << r.at("count").get<uint64_t>() << '\n';
    }
  } else {
    throw NotFoundError("unknown aggregate '" + std::string(name) + "'");
  }
  return out.str();
}

}  // namespace geopool::analytics
