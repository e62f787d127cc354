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

#include "geopool/ingest/report_io.h"

#include <cstdio>

#include "geopool/error.h"

namespace geopool::ingest {

namespace {

using std::chrono::days;
using std::chrono::floor;
using std::chrono::sys_days;
using std::chrono::sys_seconds;

constexpr std::string_view kCsvHeader =
    "report_id,tags,country,province,city,resolution,released_at\n";

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string FormatReleaseTime(sys_seconds t) {
  const sys_days day = floor<days>(t);
  const std::chrono::year_month_day ymd(day);
  const auto secs = (t - day).count();
  char buf[64];
  if (secs == 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                  static_cast<long long>(secs / 3600),
                  static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60));
  }
  return buf;
}

sys_seconds ParseReleaseTime(std::string_view s) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
  int used = 0;
  const std::string str(s);
  bool ok = false;
  if (s.size() == 10) {
    ok = std::sscanf(str.c_str(), "%4d-%2u-%2u%n", &y, &mo, &d, &used) == 3;
  } else if (s.size() == 20) {
    ok = std::sscanf(str.c_str(), "%4d-%2u-%2uT%2u:%2u:%2uZ%n", &y, &mo, &d, &h,
                     &mi, &se, &used) == 6;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y),
                                        std::chrono::month(mo),
                                        std::chrono::day(d)};
  if (!ok || used != static_cast<int>(s.size()) || !ymd.ok() || h > 23 ||
      mi > 59 || se > 59) {
    throw ParseError("bad released_at '" + str + "'");
  }
  return sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi) +
         std::chrono::seconds(se);
}

nlohmann::json ExportRecord(const survey::PublicReport& r) {
  const auto& d = r.designation;
  nlohmann::json j;
  j["report_id"] = r.report_id;
  j["tags"] = r.selections;
  j["country"] = d.country();
  j["province"] = d.province() ? nlohmann::json(*d.province()) : nullptr;
  j["city"] = d.city() ? nlohmann::json(*d.city()) : nullptr;
  j["resolution"] = geo::ResolutionName(d.resolution());
  j["released_at"] = FormatReleaseTime(r.released_at);
  return j;
}

survey::PublicReport ParseExportRecord(const nlohmann::json& j) {
  static const std::vector<std::string> kKeys = {
      "report_id", "tags", "country", "province", "city", "resolution",
      "released_at"};
  if (!j.is_object()) throw ParseError("export record is not an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) {
      throw ParseError("unknown field '" + k + "' in export record");
    }
  }
  try {
    std::optional<std::string> province, city;
    if (!j.at("province").is_null()) province = j.at("province").get<std::string>();
    if (!j.at("city").is_null()) city = j.at("city").get<std::string>();
    auto d = geo::GeoDesignation::Make(
        j.at("country").get<std::string>(),
        province ? std::optional<std::string_view>(*province) : std::nullopt,
        city ? std::optional<std::string_view>(*city) : std::nullopt);
    if (geo::ParseResolution(j.at("resolution").get<std::string>()) !=
        d.resolution()) {
      throw ParseError("resolution does not match the levels present");
    }
    auto tags = j.at("tags").get<std::vector<std::string>>();
    std::sort(tags.begin(), tags.end());
    return {j.at("report_id").get<std::string>(), std::move(tags), std::move(d),
            ParseReleaseTime(j.at("released_at").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad export record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw ParseError(std::string("bad export record: ") + e.what());
  }
}

void WriteJsonl(std::span<const survey::PublicReport> reports,
                std::ostream& out) {
  for (const auto& r : reports) out << ExportRecord(r).dump() << '\n';
}

void WriteCsv(std::span<const survey::PublicReport> reports,
              std::ostream& out) {
  out << kCsvHeader;
  for (const auto& r : reports) {
    std::string tags;
    for (const auto& t : r.selections) {
      if (!tags.empty()) tags += ';';
      tags += t;
    }
    const auto& d = r.designation;
    out << CsvField(r.report_id) << ',' << CsvField(tags) << ','
        << CsvField(d.country()) << ',' << CsvField(d.province().value_or(""))
        << ',' << CsvField(d.city().value_or("")) << ','
        << geo::ResolutionName(d.resolution()) << ','
        << FormatReleaseTime(r.released_at) << '\n';
  }
}

std::vector<survey::PublicReport> ReadJsonl(std::istream& in) {
  std::vector<survey::PublicReport> out;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ParseExportRecord(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace geopool::ingest
