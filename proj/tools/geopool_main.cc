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

// geopool: serve the report API, generate fixtures, run simulations and
// offline aggregates.
//
// Options can come from a TOML/INI file (--config, sections named after the
// subcommand), from GEOPOOL_* environment variables, or from flags. Flags
// win over the file, which wins over the environment.

#include <signal.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "geopool/analytics/aggregate.h"
#include "geopool/analytics/analytics.h"
#include "geopool/error.h"
#include "geopool/geo/geocoder.h"
#include "geopool/ingest/auth.h"
#include "geopool/ingest/http_server.h"
#include "geopool/ingest/report_io.h"
#include "geopool/ingest/service.h"
#include "geopool/release/engine.h"
#include "geopool/release/sqlite_store.h"
#include "geopool/sim/fixture.h"
#include "geopool/sim/simulator.h"
#include "geopool/survey/catalog.h"
#include "geopool/survey/report.h"
#include "httplib.h"
#include "json.hpp"

namespace {

using geopool::Error;
using nlohmann::json;

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw geopool::NotFoundError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw geopool::ParseError(path + ": " + e.what());
  }
}

// Writes to `path`, or stdout for "" and "-".
template <typename Fn>
void WithOutput(const std::string& path, Fn fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw geopool::UnavailableError("cannot write " + path);
  fn(out);
  if (!out) throw geopool::UnavailableError("write failed: " + path);
}

void WriteReports(const std::vector<geopool::survey::PublicReport>& reports,
                  const std::string& format, std::ostream& out) {
  if (format == "csv") {
    geopool::ingest::WriteCsv(reports, out);
  } else {
    geopool::ingest::WriteJsonl(reports, out);
  }
}

struct UrlParts {
  std::string base;  // scheme://host:port
  std::string prefix;
};

UrlParts SplitUrl(const std::string& url) {
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

std::chrono::seconds ParseGranularity(const std::string& g) {
  if (g == "hour") return std::chrono::hours(1);
  if (g == "day") return std::chrono::days(1);
  if (g == "week") return std::chrono::weeks(1);
  throw geopool::InvalidArgumentError("granularity must be hour, day or week");
}

// ---------------------------------------------------------------- serve

struct ServeOptions {
  std::string catalog = "data/catalog.json";
  std::string db = "geopool.db";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string key;
  uint32_t k = 5;
  std::string granularity = "day";
  uint32_t escalation_after = 0;
  int64_t replay_window = 300;
  int maintenance_seconds = 60;
};

int RunServe(const ServeOptions& o) {
  auto catalog = geopool::survey::Catalog::FromFile(o.catalog);
  auto policy = geopool::release::ReleasePolicy::WithK(o.k);
  policy.granularity = ParseGranularity(o.granularity);
  if (o.escalation_after > 0) policy.escalation_after = o.escalation_after;
  policy.Validate();

  geopool::release::SqliteStore store(o.db);
  geopool::release::ReleaseEngine engine(policy, store);
  geopool::ingest::ServiceOptions so;
  so.auth.shared_key = o.key;
  so.auth.replay_window = std::chrono::seconds(o.replay_window);
  so.auth.Validate();
  geopool::ingest::Service service(catalog, engine, store, so);
  geopool::ingest::HttpServer server(service);

  // Signals are handled by sigwait on this thread, so block them before any
  // other thread starts.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = server.Bind(o.host, o.port);
  std::cerr << "geopool: catalog " << catalog.version() << ", k=" << o.k
            << ", listening on " << o.host << ":" << port << "\n";
  std::thread http([&] { server.Run(); });

  std::mutex mu;
  std::condition_variable cv;
  bool stopping = false;
  std::thread maintenance([&] {
    if (!policy.escalation_after) return;
    std::unique_lock lock(mu);
    while (!cv.wait_for(lock, std::chrono::seconds(o.maintenance_seconds),
                        [&] { return stopping; })) {
      try {
        auto r = engine.EscalateStale(
            std::chrono::time_point_cast<std::chrono::seconds>(
                std::chrono::system_clock::now()));
        if (!r.moves.empty()) {
          std::cerr << "geopool: escalated " << r.moves.size()
                    << " pending reports\n";
        }
      } catch (const Error& e) {
        std::cerr << "geopool: escalation failed: " << e.what() << "\n";
      }
    }
  });

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "geopool: shutting down\n";
  server.Stop();
  {
    std::lock_guard lock(mu);
    stopping = true;
  }
  cv.notify_all();
  http.join();
  maintenance.join();
  return 0;
}

// ---------------------------------------------------------------- load-schema

int RunLoadSchema(const std::string& path, bool print) {
  auto doc = ReadJsonFile(path);
  auto surveys = geopool::survey::ParseCatalogJson(doc);
  auto result = geopool::survey::ValidateCatalog(surveys);
  if (!result.ok()) {
    for (const auto& v : result.violations) {
      std::cerr << v.element << ": " << v.message << "\n";
    }
    return 1;
  }
  auto catalog = geopool::survey::Catalog::Create(std::move(surveys));
  if (print) {
    std::cout << catalog.ToJson().dump(2) << "\n";
    return 0;
  }
  std::cout << "version " << catalog.version() << "\n";
  for (const auto& s : catalog.surveys()) {
    size_t tags = 0;
    for (const auto& q : s.questions) tags += q.tags.size();
    std::cout << s.survey_id << "\t" << s.questions.size() << " questions\t"
              << tags << " tags\t" << s.name << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- gen-fixture

int RunGenFixture(const std::string& spec_path, const std::string& catalog_path,
                  const std::string& out, const std::string& format) {
  auto catalog = geopool::survey::Catalog::FromFile(catalog_path);
  auto spec = geopool::sim::ParseFixtureSpec(ReadJsonFile(spec_path));
  auto fixture = geopool::sim::GenerateFixture(spec, catalog);
  WithOutput(out, [&](std::ostream& os) { WriteReports(fixture.reports, format, os); });
  std::cerr << "geopool: " << fixture.reports.size() << " reports, tag model mu="
            << fixture.tag_model.mu << " sigma=" << fixture.tag_model.sigma
            << " expected mean=" << fixture.tag_model.expected_mean
            << " expected tail=" << fixture.tag_model.expected_tail << "\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

int RunSimulate(const std::string& config_path, std::optional<uint32_t> seeds,
                bool serial, const std::string& format, const std::string& out) {
  auto config = geopool::sim::ParseSimConfig(ReadJsonFile(config_path));
  if (seeds) config.seeds = *seeds;
  config.Validate();
  auto reports = geopool::sim::SimulateSweep(
      config, serial ? geopool::analytics::Exec::kSerial
                     : geopool::analytics::Exec::kParallel);
  WithOutput(out, [&](std::ostream& os) {
    if (format == "csv") {
      os << geopool::sim::ToCsv(reports);
      return;
    }
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(geopool::sim::ToJson(r));
    os << arr.dump(2) << "\n";
  });
  return 0;
}

// ---------------------------------------------------------------- aggregate

struct AggregateOptions {
  std::string name;
  std::string from;
  std::string url;
  std::string catalog = "data/catalog.json";
  std::vector<std::string> params;
  std::string format = "json";
  bool serial = false;
};

int RunAggregate(const AggregateOptions& o) {
  geopool::analytics::AggregateParams params;
  for (const auto& p : o.params) {
    auto eq = p.find('=');
    if (eq == std::string::npos) {
      throw geopool::InvalidArgumentError("parameter '" + p + "' is not key=value");
    }
    params[p.substr(0, eq)] = p.substr(eq + 1);
  }

  if (!o.url.empty()) {
    auto [base, prefix] = SplitUrl(o.url);
    httplib::Client client(base);
    httplib::Params query(params.begin(), params.end());
    query.emplace("format", o.format);
    auto res = client.Get(prefix + "/api/v1/aggregates/" + o.name, query,
                          httplib::Headers{});
    if (!res) throw geopool::UnavailableError("cannot reach " + o.url);
    std::cout << res->body;
    if (!res->body.empty() && res->body.back() != '\n') std::cout << "\n";
    return res->status == 200 ? 0 : 1;
  }

  auto catalog = geopool::survey::Catalog::FromFile(o.catalog);
  std::ifstream in(o.from);
  if (!in) throw geopool::NotFoundError("cannot open " + o.from);
  auto reports = geopool::ingest::ReadJsonl(in);
  geopool::analytics::Analyzer analyzer(
      reports, catalog,
      o.serial ? geopool::analytics::Exec::kSerial
               : geopool::analytics::Exec::kParallel);
  auto result = geopool::analytics::RunAggregate(analyzer, o.name, params);
  if (o.format == "csv") {
    std::cout << geopool::analytics::AggregateCsv(o.name, result);
  } else {
    std::cout << result.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- export

int RunExport(const std::string& db, const std::string& url,
              const std::string& format, const std::string& out) {
  if (!url.empty()) {
    auto [base, prefix] = SplitUrl(url);
    httplib::Client client(base);
    auto res = client.Get(prefix + "/api/v1/export?format=" + format);
    if (!res) throw geopool::UnavailableError("cannot reach " + url);
    if (res->status != 200) {
      std::cerr << res->body << "\n";
      return 1;
    }
    WithOutput(out, [&](std::ostream& os) { os << res->body; });
    return 0;
  }
  geopool::release::SqliteStore store(db);
  auto reports = store.AllPublic();
  WithOutput(out, [&](std::ostream& os) { WriteReports(reports, format, os); });
  std::cerr << "geopool: exported " << reports.size() << " reports\n";
  return 0;
}

// ---------------------------------------------------------------- submit

struct SubmitOptions {
  std::string url = "http://127.0.0.1:8080";
  std::string key;
  std::string catalog = "data/catalog.json";
  std::vector<std::string> tags;
  std::string country, province, city;
  std::optional<double> lat, lon;
  std::string geocoder = "data/geocoder_stub.json";
  std::string resolution = "city";
};

int RunSubmit(const SubmitOptions& o) {
  auto catalog = geopool::survey::Catalog::FromFile(o.catalog);

  // Coordinates are resolved here and dropped; only the designation leaves
  // this process.
  std::optional<geopool::geo::GeoDesignation> designation;
  if (o.lat || o.lon) {
    if (!o.lat || !o.lon) {
      throw geopool::InvalidArgumentError("--lat and --lon go together");
    }
    auto geocoder = geopool::geo::StubGeocoder::FromFile(o.geocoder);
    auto d = geopool::geo::ReverseGeocode(
        geopool::geo::Coordinates::Make(*o.lat, *o.lon), geocoder);
    designation = geopool::geo::Coarsen(d, geopool::geo::ParseResolution(o.resolution));
  } else {
    if (o.country.empty()) {
      throw geopool::InvalidArgumentError("give --country or --lat/--lon");
    }
    designation = geopool::geo::GeoDesignation::Make(
        o.country,
        o.province.empty() ? std::nullopt : std::optional<std::string_view>(o.province),
        o.city.empty() ? std::nullopt : std::optional<std::string_view>(o.city));
  }

  std::vector<std::string> tags = o.tags;
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  geopool::survey::ReportSubmission sub{tags, *designation, catalog.version()};
  auto check = geopool::survey::ValidateSubmission(sub, catalog);
  if (!check.ok()) {
    for (const auto& v : check.violations) {
      std::cerr << v.element << ": " << v.message << "\n";
    }
    return 1;
  }

  const std::string body = geopool::survey::SubmissionToJson(sub).dump();
  const int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  auto auth = geopool::ingest::SignRequest(o.key, now,
                                           geopool::ingest::RandomNonce(), body);
  auto [base, prefix] = SplitUrl(o.url);
  httplib::Client client(base);
  httplib::Headers headers = {{geopool::ingest::kTimestampHeader, auth.timestamp},
                              {geopool::ingest::kNonceHeader, auth.nonce},
                              {geopool::ingest::kMacHeader, auth.mac}};
  auto res = client.Post(prefix + "/api/v1/reports", headers, body,
                         "application/json");
  if (!res) throw geopool::UnavailableError("cannot reach " + o.url);
  std::cout << res->status << " " << res->body << "\n";
  return res->status / 100 == 2 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geopool: delayed-release anonymous survey reports"};
  app.set_config("--config", "", "TOML/INI file with one section per subcommand");
  app.require_subcommand(1);

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--catalog", serve.catalog)->envname("GEOPOOL_CATALOG");
  serve_cmd->add_option("--db", serve.db, "SQLite path")->envname("GEOPOOL_DB");
  serve_cmd->add_option("--host", serve.host)->envname("GEOPOOL_HOST");
  serve_cmd->add_option("--port", serve.port)->envname("GEOPOOL_PORT");
  serve_cmd->add_option("--key", serve.key, "Shared app key")
      ->envname("GEOPOOL_SHARED_KEY")
      ->required();
  serve_cmd->add_option("--k", serve.k, "Release threshold")
      ->envname("GEOPOOL_K")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--granularity", serve.granularity)
      ->envname("GEOPOOL_GRANULARITY")
      ->check(CLI::IsMember({"hour", "day", "week"}));
  serve_cmd->add_option("--escalation-after", serve.escalation_after,
                        "Granularity units before a pool moves up (0 = never)")
      ->envname("GEOPOOL_ESCALATION_AFTER");
  serve_cmd->add_option("--replay-window", serve.replay_window, "Seconds")
      ->envname("GEOPOOL_REPLAY_WINDOW")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--maintenance-seconds", serve.maintenance_seconds)
      ->check(CLI::PositiveNumber);

  std::string schema_path = "data/catalog.json";
  bool schema_print = false;
  auto* schema_cmd = app.add_subcommand("load-schema", "Validate a survey catalog");
  schema_cmd->add_option("catalog", schema_path)->envname("GEOPOOL_CATALOG");
  schema_cmd->add_flag("--print", schema_print, "Print the canonical document");

  std::string fx_spec, fx_catalog = "data/catalog.json", fx_out, fx_format = "jsonl";
  auto* fx_cmd = app.add_subcommand("gen-fixture", "Generate a synthetic public set");
  fx_cmd->add_option("spec", fx_spec)->required()->check(CLI::ExistingFile);
  fx_cmd->add_option("--catalog", fx_catalog)->envname("GEOPOOL_CATALOG");
  fx_cmd->add_option("-o,--output", fx_out);
  fx_cmd->add_option("--format", fx_format)->check(CLI::IsMember({"jsonl", "csv"}));

  std::string sim_config, sim_format = "json", sim_out;
  std::optional<uint32_t> sim_seeds;
  bool sim_serial = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Release-latency simulation");
  sim_cmd->add_option("config", sim_config)->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--seeds", sim_seeds)->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--serial", sim_serial, "Run seeds on one thread");
  sim_cmd->add_option("--format", sim_format)->check(CLI::IsMember({"json", "csv"}));
  sim_cmd->add_option("-o,--output", sim_out);

  AggregateOptions agg;
  auto* agg_cmd = app.add_subcommand("aggregate", "Compute a public aggregate");
  agg_cmd->add_option("name", agg.name)
      ->required()
      ->check(CLI::IsMember(geopool::analytics::AggregateNames()));
  auto* agg_from = agg_cmd->add_option("--from", agg.from, "JSON Lines export")
                       ->check(CLI::ExistingFile);
  auto* agg_url = agg_cmd->add_option("--url", agg.url, "Server base URL")
                      ->envname("GEOPOOL_URL");
  agg_from->excludes(agg_url);
  agg_cmd->add_option("--catalog", agg.catalog)->envname("GEOPOOL_CATALOG");
  agg_cmd->add_option("-p,--param", agg.params, "key=value, repeatable");
  agg_cmd->add_option("--format", agg.format)->check(CLI::IsMember({"json", "csv"}));
  agg_cmd->add_flag("--serial", agg.serial);

  std::string ex_db = "geopool.db", ex_url, ex_format = "jsonl", ex_out;
  auto* ex_cmd = app.add_subcommand("export", "Export the public reports");
  auto* ex_db_opt = ex_cmd->add_option("--db", ex_db)->envname("GEOPOOL_DB");
  ex_cmd->add_option("--url", ex_url, "Fetch from a server instead")
      ->excludes(ex_db_opt);
  ex_cmd->add_option("--format", ex_format)->check(CLI::IsMember({"jsonl", "csv"}));
  ex_cmd->add_option("-o,--output", ex_out);

  SubmitOptions sub;
  auto* sub_cmd = app.add_subcommand("submit", "Sign and send one report");
  sub_cmd->add_option("--url", sub.url)->envname("GEOPOOL_URL");
  sub_cmd->add_option("--key", sub.key)->envname("GEOPOOL_SHARED_KEY")->required();
  sub_cmd->add_option("--catalog", sub.catalog)->envname("GEOPOOL_CATALOG");
  sub_cmd->add_option("--tags", sub.tags)->delimiter(',')->required();
  sub_cmd->add_option("--country", sub.country);
  sub_cmd->add_option("--province", sub.province);
  sub_cmd->add_option("--city", sub.city);
  sub_cmd->add_option("--lat", sub.lat);
  sub_cmd->add_option("--lon", sub.lon);
  sub_cmd->add_option("--geocoder", sub.geocoder, "Bounding-box table");
  sub_cmd->add_option("--resolution", sub.resolution)
      ->check(CLI::IsMember({"country", "province", "city"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return RunServe(serve);
    if (*schema_cmd) return RunLoadSchema(schema_path, schema_print);
    if (*fx_cmd) return RunGenFixture(fx_spec, fx_catalog, fx_out, fx_format);
    if (*sim_cmd) {
      return RunSimulate(sim_config, sim_seeds, sim_serial, sim_format, sim_out);
    }
    if (*agg_cmd) {
      if (agg.from.empty() && agg.url.empty()) {
        std::cerr << "aggregate: give --from or --url\n";
        return 2;
      }
      return RunAggregate(agg);
    }
    if (*ex_cmd) return RunExport(ex_db, ex_url, ex_format, ex_out);
    if (*sub_cmd) return RunSubmit(sub);
  } catch (const Error& e) {
    std::cerr << "geopool: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
