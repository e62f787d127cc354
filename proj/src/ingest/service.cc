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

#include "geopool/ingest/service.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "geopool/analytics/aggregate.h"
#include "geopool/error.h"
#include "geopool/ingest/report_io.h"
#include "geopool/survey/report.h"

namespace geopool::ingest {

namespace {

constexpr std::string_view kAggregatePrefix = "/api/v1/aggregates/";

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

HttpResponse Json(int status, const nlohmann::json& body) {
  return {status, "application/json", body.dump()};
}

HttpResponse Fail(int status, const std::string& error,
                  nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = error;
  return Json(status, extra);
}

int StatusFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kFailedPrecondition:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kUnavailable:
      return 503;
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

std::optional<size_t> ParsePositive(const std::string& s) {
  size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || v == 0) {
    return std::nullopt;
  }
  return v;
}

nlohmann::json ViolationsJson(const survey::ValidationResult& result) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : result.violations) {
    v.push_back({{"element", x.element}, {"message", x.message}});
  }
  return v;
}

}  // namespace

std::optional<std::string> HttpRequest::Header(std::string_view name) const {
  auto it = headers.find(Lower(name));
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

Service::Service(const survey::Catalog& catalog,
                 release::ReleaseEngine& engine, release::Store& store,
                 ServiceOptions options, Clock clock,
                 std::optional<uint64_t> id_seed)
    : catalog_(catalog),
      engine_(engine),
      store_(store),
      options_(std::move(options)),
      clock_(clock ? std::move(clock) : [] {
        return std::chrono::time_point_cast<std::chrono::seconds>(
            std::chrono::system_clock::now());
      }),
      verifier_(options_.auth),
      ids_(id_seed) {}

HttpResponse Service::Handle(const HttpRequest& request) {
  try {
    const std::string& path = request.path;
    const bool get = request.method == "GET";
    if (path == "/api/v1/reports") {
      if (request.method != "POST") return Fail(405, "method not allowed");
      return Submit(request);
    }
    if (path == "/api/v1/schema" || path == "/api/v1/reports/public" ||
        path == "/api/v1/export" || path.starts_with(kAggregatePrefix)) {
      if (!get) return Fail(405, "method not allowed");
    }
    if (path == "/api/v1/schema") return Json(200, catalog_.ToJson());
    if (path == "/api/v1/reports/public") return PublicReports(request);
    if (path == "/api/v1/export") return Export(request);
    if (path.starts_with(kAggregatePrefix)) {
      return Aggregate(path.substr(kAggregatePrefix.size()), request);
    }
    return Fail(404, "not found");
  } catch (const Error& e) {
    return Fail(StatusFor(e), e.what());
  } catch (const std::exception& e) {
    return Fail(500, "internal error");
  }
}

HttpResponse Service::Submit(const HttpRequest& request) {
  if (request.body.size() > options_.max_body_bytes) {
    return Fail(413, "body too large");
  }
  const auto now = clock_();
  const auto reject = verifier_.Verify(
      request.Header(kTimestampHeader), request.Header(kNonceHeader),
      request.Header(kMacHeader), request.body,
      now.time_since_epoch().count());
  if (reject) {
    return Fail(401, "unauthorized",
                {{"code", std::string(AuthRejectCode(*reject))}});
  }

  survey::SubmissionCheck check;
  try {
    check = survey::CheckSubmissionPayload(request.body, catalog_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    return Fail(400, "malformed body",
                {{"violations",
                  {{{"element", "body"}, {"message", e.what()}}}}});
  }
  if (!check.result.ok()) {
    return Fail(400, "invalid report",
                {{"violations", ViolationsJson(check.result)}});
  }

  release::PendingReport pending{ids_.Next(),
                                 std::move(check.submission->selections),
                                 std::move(check.submission->designation)};
  try {
    auto batch = engine_.Enqueue(std::move(pending), now);
    if (batch) return Json(200, {{"status", "released"}});
    return Json(202, {{"status", "pending"}});
  } catch (const Error& e) {
    if (e.retryable()) return Fail(503, "storage unavailable");
    throw;
  }
}

HttpResponse Service::PublicReports(const HttpRequest& request) {
  size_t page = 1, page_size = options_.default_page_size;
  for (const auto& [k, v] : request.query) {
    auto n = ParsePositive(v);
    if (k == "page" && n) {
      page = *n;
    } else if (k == "page_size" && n && *n <= options_.max_page_size) {
      page_size = *n;
    } else {
      return Fail(400, "bad query parameter '" + k + "'");
    }
  }
  nlohmann::json j = {{"page", page}, {"page_size", page_size},
                      {"total", store_.PublicCount()}};
  j["reports"] = nlohmann::json::array();
  // Guard the multiplication; such pages are empty anyway.
  if (page - 1 <= std::numeric_limits<size_t>::max() / page_size) {
    for (const auto& r : store_.PublicPage((page - 1) * page_size, page_size)) {
      j["reports"].push_back(ExportRecord(r));
    }
  }
  return Json(200, j);
}

std::shared_ptr<const analytics::Analyzer> Service::Snapshot() {
  std::lock_guard lock(snapshot_mu_);
  // The public set only grows, so an unchanged count means unchanged data.
  const size_t count = store_.PublicCount();
  if (!snapshot_ || count != snapshot_count_) {
    auto reports = store_.AllPublic();
    snapshot_ = std::make_shared<const analytics::Analyzer>(reports, catalog_);
    snapshot_count_ = reports.size();
  }
  return snapshot_;
}

HttpResponse Service::Aggregate(const std::string& name,
                                const HttpRequest& request) {
  const auto& names = analytics::AggregateNames();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    return Fail(404, "unknown aggregate '" + name + "'");
  }
  analytics::AggregateParams params(request.query.begin(), request.query.end());
  std::string format = "json";
  if (auto it = params.find("format"); it != params.end()) {
    format = it->second;
    params.erase(it);
  }
  if (format != "json" && format != "csv") {
    return Fail(400, "format must be json or csv");
  }
  auto result = analytics::RunAggregate(*Snapshot(), name, params);
  if (format == "csv") {
    return {200, "text/csv", analytics::AggregateCsv(name, result)};
  }
  return Json(200, result);
}

HttpResponse Service::Export(const HttpRequest& request) {
  std::string format = "jsonl";
  for (const auto& [k, v] : request.query) {
    if (k != "format") return Fail(400, "bad query parameter '" + k + "'");
    format = v;
  }
  const auto reports = store_.AllPublic();
  std::ostringstream out;
  if (format == "jsonl") {
    WriteJsonl(reports, out);
    return {200, "application/x-ndjson", out.str()};
  }
  if (format == "csv") {
    WriteCsv(reports, out);
    return {200, "text/csv", out.str()};
  }
  return Fail(400, "format must be jsonl or csv");
}

}  // namespace geopool::ingest
