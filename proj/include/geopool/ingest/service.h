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

// The HTTP API as a pure request -> response function, so every route can be
// tested without sockets. HttpServer (http_server.h) adapts it to a socket.
//
//   POST /api/v1/reports               authenticated submission
//   GET  /api/v1/schema                served catalog
//   GET  /api/v1/reports/public        ?page=&page_size=
//   GET  /api/v1/aggregates/{name}     ?format=json|csv plus aggregate params
//   GET  /api/v1/export                ?format=jsonl|csv
//
// Nothing served here exposes pending reports, pool sizes, arrival times or
// anything that identifies a submitter.

#ifndef GEOPOOL_INGEST_SERVICE_H_
#define GEOPOOL_INGEST_SERVICE_H_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "geopool/analytics/analytics.h"
#include "geopool/ingest/auth.h"
#include "geopool/release/engine.h"
#include "geopool/release/report_id.h"
#include "geopool/release/store.h"
#include "geopool/survey/catalog.h"

namespace geopool::ingest {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // keys lowercased
  std::string body;

  std::optional<std::string> Header(std::string_view name) const;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceOptions {
  AuthConfig auth;
  size_t max_body_bytes = 64 * 1024;
  size_t default_page_size = 50;
  size_t max_page_size = 500;
};

class Service {
 public:
  using Clock = std::function<release::Timestamp()>;

  // `clock` defaults to the system clock; `id_seed` makes report ids
  // reproducible in tests.
  Service(const survey::Catalog& catalog, release::ReleaseEngine& engine,
          release::Store& store, ServiceOptions options, Clock clock = {},
          std::optional<uint64_t> id_seed = std::nullopt);

  HttpResponse Handle(const HttpRequest& request);

 private:
  HttpResponse Submit(const HttpRequest& request);
  HttpResponse PublicReports(const HttpRequest& request);
  HttpResponse Aggregate(const std::string& name, const HttpRequest& request);
  HttpResponse Export(const HttpRequest& request);

  // Analyzer over the current public set, rebuilt only when it grew.
  std::shared_ptr<const analytics::Analyzer> Snapshot();

  const survey::Catalog& catalog_;
  release::ReleaseEngine& engine_;
  release::Store& store_;
  ServiceOptions options_;
  Clock clock_;
  RequestVerifier verifier_;
  release::ReportIdGenerator ids_;

  std::mutex snapshot_mu_;
  std::shared_ptr<const analytics::Analyzer> snapshot_;
  size_t snapshot_count_ = 0;
};

}  // namespace geopool::ingest

#endif  // GEOPOOL_INGEST_SERVICE_H_
