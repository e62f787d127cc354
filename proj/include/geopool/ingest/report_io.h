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

// Open-data export of the public store: JSON Lines (one report per line)
// and CSV. Both are deterministic, so two exports of the same public set
// are byte-identical.

#ifndef GEOPOOL_INGEST_REPORT_IO_H_
#define GEOPOOL_INGEST_REPORT_IO_H_

#include <chrono>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geopool/survey/report.h"
#include "json.hpp"

namespace geopool::ingest {

// "2026-03-01" at midnight UTC, else "2026-03-01T13:00:00Z".
std::string FormatReleaseTime(std::chrono::sys_seconds t);
// Inverse of FormatReleaseTime. Throws kParse.
std::chrono::sys_seconds ParseReleaseTime(std::string_view s);

// Keys: report_id, tags, country, province, city, resolution, released_at.
nlohmann::json ExportRecord(const survey::PublicReport& r);
// Strict inverse of ExportRecord. Throws kParse.
survey::PublicReport ParseExportRecord(const nlohmann::json& j);

void WriteJsonl(std::span<const survey::PublicReport> reports,
                std::ostream& out);
// Header row, then one row per report with tags joined by ';'.
void WriteCsv(std::span<const survey::PublicReport> reports, std::ostream& out);

// Reads a JSON Lines export; blank lines are skipped. Throws kParse with the
// line number.
std::vector<survey::PublicReport> ReadJsonl(std::istream& in);

}  // namespace geopool::ingest

#endif  // GEOPOOL_INGEST_REPORT_IO_H_
