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

// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/hmac_oracle.h"
#include "../common/oracles.h"
#include "../common/random_reports.h"
#include "../common/rank.h"
#include "geopool/analytics/analytics.h"
#include "geopool/error.h"
#include "geopool/geo/designation.h"
#include "geopool/geo/geocoder.h"
#include "geopool/ingest/auth.h"
#include "geopool/ingest/service.h"
#include "geopool/release/engine.h"
#include "geopool/release/store.h"
#include "geopool/sim/fixture.h"
#include "geopool/sim/simulator.h"
#include "geopool/survey/catalog.h"
#include "geopool/survey/report.h"
#include "json.hpp"

namespace geopool {
namespace {

using geo::GeoDesignation;
using nlohmann::json;
using release::PendingReport;
using release::ReleaseBatch;
using release::ReleaseEngine;
using release::ReleasePolicy;
using release::Timestamp;
using survey::Catalog;
using survey::PublicReport;

const std::string kDataDir = GEOPOOL_DATA_DIR;

const Catalog& TheCatalog() {
  static const Catalog* c = new Catalog(Catalog::FromFile(kDataDir + "/catalog.json"));
  return *c;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failing check; later ones are ignored.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && failure_.empty()) failure_ = what;
  }
  bool ok() const { return failure_.empty(); }
  const std::string& failure() const { return failure_; }

 private:
  std::string failure_;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string Fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

PendingReport MakePending(std::string id, const GeoDesignation& d,
                          const survey::PublicReport& shape) {
  return {std::move(id), shape.selections, d};
}

// ---------------------------------------------------------------------------
// 1. No batch smaller than k; nothing public outside a batch.

Outcome KAnonymityStreams() {
  const auto start = std::chrono::steady_clock::now();
  Checker c;
  const auto places = testing::TestPlaces();
  const auto shapes = testing::RandomReports(TheCatalog(), 50, 5);
  uint64_t runs = 0, batches = 0, smallest_margin = UINT64_MAX;
  for (uint32_t k = 1; k <= 10; ++k) {
    for (uint64_t seed = 0; seed < 30; ++seed) {
      std::mt19937_64 rng(seed * 1000 + k);
      release::MemoryStore store;
      ReleasePolicy policy = ReleasePolicy::WithK(k);
      if (seed % 2 == 1) policy.escalation_after = 3;
      ReleaseEngine engine(policy, store, seed);
      std::set<std::string> released;
      std::set<std::string> pending;
      auto take = [&](const ReleaseBatch& b) {
        ++batches;
        const uint64_t need = policy.KFor(b.designation.resolution());
        c.Expect(b.reports.size() >= need,
                 "batch of " + std::to_string(b.reports.size()) + " at k=" +
                     std::to_string(k));
        smallest_margin = std::min<uint64_t>(smallest_margin, b.reports.size() - need);
        for (const auto& r : b.reports) {
          c.Expect(pending.erase(r.report_id) == 1, "released twice or unknown");
          released.insert(r.report_id);
        }
      };
      Timestamp now(std::chrono::seconds(1'700'000'000));
      std::exponential_distribution<double> gap(1.0 / 3600.0);
      for (int i = 0; i < 1000; ++i) {
        now += std::chrono::seconds(static_cast<int64_t>(gap(rng)));
        const std::string id = "s" + std::to_string(seed) + "-" + std::to_string(i);
        pending.insert(id);
        auto got = engine.Enqueue(
            MakePending(id, places[rng() % places.size()], shapes[rng() % shapes.size()]),
            now);
        if (got) take(*got);
        if (policy.escalation_after && i % 10 == 0) {
          for (const auto& b : engine.EscalateStale(now).batches) take(b);
        }
        if (i % 100 == 99) {
          // The public view must be exactly the released set.
          auto pub = store.AllPublic();
          c.Expect(pub.size() == released.size(), "public count drifted");
          for (const auto& r : pub) {
            c.Expect(!pending.contains(r.report_id), "pending report visible");
          }
        }
      }
      c.Expect(engine.TotalPending() == pending.size(), "pending total mismatch");
      c.Expect(store.PublicCount() + pending.size() == 1000, "reports lost");
      ++runs;
    }
  }
  const double secs = Seconds(start);
  c.Expect(secs < 10.0, Fmt("runtime %.2fs", secs));
  return {c.ok(), c.ok() ? Fmt("%.0f streams, %.0f batches, all >= k, %.2fs", runs,
                               batches, secs)
                         : c.failure()};
}

// ---------------------------------------------------------------------------
// 2. Timestamps and arrival order destroyed.

// Exact E|rho| for a uniform shuffle of n items, by enumeration.
double ExpectedAbsSpearman(size_t n) {
  std::vector<size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double sum = 0;
  uint64_t count = 0;
  do {
    sum += std::abs(testing::SpearmanOfPermutation(p));
    ++count;
  } while (std::next_permutation(p.begin(), p.end()));
  return sum / count;
}

bool HasTimeLikeKey(const json& j) {
  static const std::regex kTime("time|date|arriv|submit|_at$|^ts$|created|received",
                                std::regex::icase);
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (std::regex_search(k, kTime) || HasTimeLikeKey(v)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (HasTimeLikeKey(v)) return true;
    }
  }
  return false;
}

struct OrderStats {
  uint64_t batches = 0;
  double mean_abs_rho = 0;
  double mean_rho = 0;
};

OrderStats RunOrderStream(uint32_t k, uint64_t batches_wanted, uint64_t seed,
                          Checker& c) {
  std::mt19937_64 rng(seed);
  const auto places = testing::TestPlaces();
  const auto shapes = testing::RandomReports(TheCatalog(), 50, 6);
  release::MemoryStore store;
  const ReleasePolicy policy = ReleasePolicy::WithK(k);
  ReleaseEngine engine(policy, store, seed);
  std::map<std::string, uint64_t> arrival;
  OrderStats s;
  double sum_abs = 0, sum = 0;
  Timestamp now(std::chrono::seconds(1'700'000'000));
  bool dumped = false;
  for (uint64_t i = 0; s.batches < batches_wanted; ++i) {
    now += std::chrono::seconds(1 + rng() % 7200);
    const std::string id = "o" + std::to_string(i);
    arrival[id] = i;
    auto got = engine.Enqueue(
        MakePending(id, places[rng() % places.size()], shapes[rng() % shapes.size()]),
        now);
    if (!dumped && engine.TotalPending() > places.size()) {
      // Mid-stream: pending reports exist in several pools.
      // The only time is the per-pool opened_at; reports carry none.
      for (const json& pools : {engine.DumpState(), store.DumpState()["pools"]}) {
        c.Expect(pools.size() > 1, "expected several pending pools");
        for (const auto& pool : pools) {
          c.Expect(pool.size() == 3 && pool.contains("opened_at"),
                   "unexpected pool fields: " + pool.dump());
          c.Expect(!HasTimeLikeKey(pool["reports"]),
                   "pending report has a time field");
        }
      }
      dumped = true;
    }
    if (!got) continue;
    const auto& b = *got;
    for (const auto& r : b.reports) {
      c.Expect(r.released_at == b.released_at, "timestamps differ within a batch");
    }
    c.Expect(b.released_at == policy.Truncate(now), "released_at not truncated");
    c.Expect(b.released_at.time_since_epoch() % std::chrono::days(1) ==
                 std::chrono::seconds(0),
             "released_at not at a day boundary");
    // Arrival rank of the report at each published position.
    std::vector<uint64_t> arrivals;
    for (const auto& r : b.reports) arrivals.push_back(arrival.at(r.report_id));
    std::vector<uint64_t> sorted = arrivals;
    std::sort(sorted.begin(), sorted.end());
    std::vector<size_t> perm;
    for (uint64_t a : arrivals) {
      perm.push_back(std::lower_bound(sorted.begin(), sorted.end(), a) - sorted.begin());
    }
    const double rho = testing::SpearmanOfPermutation(perm);
    sum_abs += std::abs(rho);
    sum += rho;
    ++s.batches;
  }
  c.Expect(dumped, "no mid-stream state dump taken");
  s.mean_abs_rho = sum_abs / s.batches;
  s.mean_rho = sum / s.batches;
  return s;
}

Outcome TimestampAndOrder() {
  Checker c;
  // |rho| of a uniform shuffle shrinks like 1/sqrt(n), so the 0.1 bound is
  // measured on batches of 128.
  auto large = RunOrderStream(128, 200, 17, c);
  c.Expect(large.mean_abs_rho < 0.1, Fmt("mean |rho| %.4f at k=128", large.mean_abs_rho));
  // Small batches: |rho| must match a uniform shuffle, not beat it.
  auto small = RunOrderStream(5, 400, 18, c);
  const double expected = ExpectedAbsSpearman(5);
  c.Expect(std::abs(small.mean_abs_rho - expected) < 0.06,
           Fmt("k=5 mean |rho| %.3f vs uniform %.3f", small.mean_abs_rho, expected));
  c.Expect(std::abs(small.mean_rho) < 0.1, Fmt("k=5 mean rho %.3f", small.mean_rho));
  return {c.ok(), c.ok() ? Fmt("no per-report time in state; mean |rho| %.4f over "
                               "%.0f batches of 128; ",
                               large.mean_abs_rho, large.batches) +
                               Fmt("k=5: mean rho %.3f, mean |rho| %.3f (uniform "
                                   "shuffle %.3f)",
                                   small.mean_rho, small.mean_abs_rho, expected)
                         : c.failure()};
}

// ---------------------------------------------------------------------------
// 3. Analytics match brute-force oracles exactly.

Outcome AnalyticsOracles() {
  const auto start = std::chrono::steady_clock::now();
  Checker c;
  const auto& cat = TheCatalog();
  uint64_t checks = 0;
  for (uint64_t seed : {1u, 2u, 3u}) {
    auto reports = testing::RandomReports(cat, 200, seed);
    for (auto exec : {analytics::Exec::kSerial, analytics::Exec::kParallel}) {
      analytics::Analyzer a(reports, cat, exec);
      c.Expect(a.TagCounts() == testing::OracleTagCounts(reports, cat), "tag counts");
      const auto within = GeoDesignation::Make("USA");
      c.Expect(a.TagCounts({within, std::nullopt}) ==
                   testing::OracleTagCounts(reports, cat, within),
               "tag counts within usa");
      for (const auto& s : cat.surveys()) {
        c.Expect(a.TagCounts({std::nullopt, s.survey_id}) ==
                     testing::OracleTagCounts(reports, cat, std::nullopt, s.survey_id),
                 "tag counts for " + s.survey_id);
        for (size_t i = 0; i < s.questions.size(); ++i) {
          for (size_t j = 0; j < s.questions.size(); ++j) {
            if (i == j) continue;
            const auto& qa = s.questions[i];
            const auto& qb = s.questions[j];
            auto t = a.Cooccurrence(qa.question_id, qb.question_id);
            auto o = testing::OracleCooccurrence(reports, qa, qb);
            c.Expect(t.base == o.base && t.cells == o.cells,
                     "cooccurrence " + qa.question_id + " x " + qb.question_id);
            ++checks;
          }
        }
      }
      struct GeoCase {
        geo::Resolution level;
        std::optional<GeoDesignation> within;
        size_t depth;
      };
      const std::vector<GeoCase> cases = {
          {geo::Resolution::kCountry, std::nullopt, 0},
          {geo::Resolution::kProvince, std::nullopt, 1},
          {geo::Resolution::kCity, std::nullopt, 2},
          {geo::Resolution::kProvince, GeoDesignation::Make("USA"), 1},
          {geo::Resolution::kCity, GeoDesignation::Make("USA"), 2},
          {geo::Resolution::kCity, GeoDesignation::Make("USA", "Indiana"), 2},
      };
      for (const auto& gc : cases) {
        auto got = a.GeographyCounts(gc.level, gc.within);
        auto want = testing::OracleGeography(reports, gc.depth, gc.within);
        std::sort(want.begin(), want.end(), [](const auto& x, const auto& y) {
          return x.second != y.second ? x.second > y.second : x.first < y.first;
        });
        bool same = got.size() == want.size();
        for (size_t i = 0; same && i < got.size(); ++i) {
          same = got[i].name == want[i].first && got[i].count == want[i].second;
        }
        c.Expect(same, "geography at depth " + std::to_string(gc.depth));
        ++checks;
      }
    }
  }
  const double secs = Seconds(start);
  c.Expect(secs < 5.0, Fmt("runtime %.2fs", secs));
  return {c.ok(), c.ok() ? Fmt("%.0f tables exact over 3x200 reports, serial and "
                               "parallel, %.2fs",
                               checks, secs)
                         : c.failure()};
}

// ---------------------------------------------------------------------------
// 4. Fixture reproduces the published counts.

Outcome FixtureReproduction() {
  Checker c;
  std::ifstream in(kDataDir + "/fixture_10k.json");
  auto spec = sim::ParseFixtureSpec(json::parse(in));
  auto fixture = sim::GenerateFixture(spec, TheCatalog());
  const auto& reports = fixture.reports;
  c.Expect(reports.size() == 10000, "fixture size");

  analytics::Analyzer a(reports, TheCatalog());
  auto summary = a.TagsPerReport();
  const double mean = *summary.mean;
  const double tail = summary.FractionAbove(80);
  c.Expect(mean >= 15.0 && mean <= 17.5, Fmt("mean tags %.3f", mean));
  c.Expect(tail >= 0.005 && tail <= 0.015, Fmt("P(>80) %.4f", tail));

  // Published survey table, counted by the oracle from the selections.
  const std::map<std::string, uint64_t> table = {
      {"Sexual Activity", 6605}, {"Flirting", 1161},
      {"Public Display of Affection", 858}, {"Sexual Fetish", 827},
      {"Porn", 528}, {"Female Hormonal Birth Control Use and Effects", 519},
      {"Unwanted Experience", 306}, {"Valentine's Day", 196}};
  for (const auto& [name, want] : table) {
    const auto* s = TheCatalog().FindSurveyByName(name);
    c.Expect(s != nullptr, "no survey " + name);
    if (!s) continue;
    uint64_t got = 0;
    for (const auto& r : reports) {
      got += survey::SurveysInReport(r.selections, TheCatalog()).contains(s->survey_id);
    }
    c.Expect(got == want, name + " count " + std::to_string(got));
  }

  auto countries = a.GeographyCounts(geo::Resolution::kCountry);
  c.Expect(!countries.empty() && countries[0] == analytics::PlaceCount{"usa", 7138},
           "usa count");
  auto states = a.GeographyCounts(geo::Resolution::kProvince, GeoDesignation::Make("USA"));
  c.Expect(!states.empty() && states[0] == analytics::PlaceCount{"indiana", 2907},
           "indiana count");
  uint64_t usa = 0, indiana = 0;
  for (const auto& r : reports) {
    usa += testing::Under(r.designation, GeoDesignation::Make("USA"));
    indiana += testing::Under(r.designation, GeoDesignation::Make("USA", "Indiana"));
  }
  c.Expect(usa == 7138 && indiana == 2907, "oracle geography");
  return {c.ok(), c.ok() ? Fmt("10000 reports: mean %.3f tags, P(>80) %.4f; survey "
                               "table exact; usa %.0f, indiana %.0f",
                               mean, tail, usa, indiana)
                         : c.failure()};
}

// ---------------------------------------------------------------------------
// 5. Geometric null.

Outcome GeometricNullCheck() {
  Checker c;
  auto counts = analytics::GeometricNull(5, 1000);
  c.Expect(counts.size() == 5, "length");
  const uint64_t sum = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
  c.Expect(sum == 1000, "sum " + std::to_string(sum));
  // Exact shares are 1000 * 2^(4-i) / 31; integer rounding moves each by < 1.
  std::string shown;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double exact = 1000.0 * std::ldexp(1.0, 4 - static_cast<int>(i)) / 31.0;
    c.Expect(std::abs(static_cast<double>(counts[i]) - exact) < 1.0,
             "count " + std::to_string(i + 1) + " far from " + std::to_string(exact));
    if (i + 1 < counts.size()) {
      // c[i+1] / c[i] = 1/2 up to the rounding of both.
      c.Expect(std::abs(2.0 * counts[i + 1] - counts[i]) <= 3.0,
               "ratio at " + std::to_string(i + 1));
    }
    shown += (i ? "," : "") + std::to_string(counts[i]);
  }
  return {c.ok(), c.ok() ? "counts " + shown + " sum 1000" : c.failure()};
}

// ---------------------------------------------------------------------------
// Shared service harness for 6 and 8.

struct Harness {
  static constexpr char kKey[] = "acceptance-shared-key";
  Timestamp now{std::chrono::seconds(1'760'000'000)};
  release::MemoryStore store;
  ReleaseEngine engine{ReleasePolicy::WithK(5), store, 3};
  ingest::Service service{TheCatalog(),
                          engine,
                          store,
                          {{kKey, std::chrono::seconds(300), 100000}},
                          [this] { return now; },
                          7};

  ingest::HttpRequest Signed(const std::string& body, int64_t at) {
    auto h = ingest::SignRequest(kKey, at, ingest::RandomNonce(), body);
    ingest::HttpRequest r{"POST", "/api/v1/reports", {}, {}, body};
    r.headers["x-auth-timestamp"] = h.timestamp;
    r.headers["x-auth-nonce"] = h.nonce;
    r.headers["x-auth-mac"] = h.mac;
    return r;
  }
  ingest::HttpResponse Post(const std::string& body) {
    return service.Handle(Signed(body, now.time_since_epoch().count()));
  }
  size_t Held() const { return store.PublicCount() + engine.TotalPending(); }
};

std::string ErrorCodeOf(const ingest::HttpResponse& r) {
  auto j = json::parse(r.body, nullptr, false);
  return j.is_object() && j.contains("code") ? j["code"].get<std::string>() : "";
}

json ValidPayload(const std::vector<std::string>& tags, const GeoDesignation& d) {
  return survey::SubmissionToJson({tags, d, TheCatalog().version()});
}

// ---------------------------------------------------------------------------
// 6. Auth.

Outcome Auth() {
  Checker c;
  // Known answer, and the library MAC against the independent oracle.
  const std::string body = R"({"tags":["fl.gender.male_flirting"]})";
  const std::string kat = ingest::ComputeMac("key", "1700000000",
                                             "00112233445566778899aabbccddeeff", body);
  c.Expect(kat == testing::OracleHmacSha256Hex(
                      "key", "1700000000\n00112233445566778899aabbccddeeff\n" + body),
           "MAC differs from oracle");
  c.Expect(ingest::ComputeMac("Jefe", "what do ya want ", "for nothing?", "") !=
               ingest::ComputeMac("Jefe", "what do ya want", "for nothing?", ""),
           "MAC ignores field boundaries");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    std::string key(1 + rng() % 100, '\0'), msg(rng() % 300, '\0');
    for (auto& ch : key) ch = static_cast<char>(rng());
    for (auto& ch : msg) ch = static_cast<char>(rng());
    c.Expect(ingest::ComputeMac(key, "1", "ab", msg) ==
                 testing::OracleHmacSha256Hex(key, "1\nab\n" + msg),
             "random MAC differs from oracle");
  }

  Harness h;
  const std::string payload =
      ValidPayload({"fl.gender.male_flirting"},
                   GeoDesignation::Make("USA", "Indiana", "Bloomington"))
          .dump();
  auto first = h.Signed(payload, h.now.time_since_epoch().count());
  c.Expect(h.service.Handle(first).status == 202, "fresh request not accepted");
  auto replay = h.service.Handle(first);
  c.Expect(replay.status == 401 && ErrorCodeOf(replay) == "REPLAY", "replay");
  auto stale = h.service.Handle(h.Signed(payload, h.now.time_since_epoch().count() - 301));
  c.Expect(stale.status == 401 && ErrorCodeOf(stale) == "STALE", "stale");
  auto future = h.service.Handle(h.Signed(payload, h.now.time_since_epoch().count() + 301));
  c.Expect(future.status == 401 && ErrorCodeOf(future) == "STALE", "future");
  auto tampered = h.Signed(payload, h.now.time_since_epoch().count());
  tampered.body.replace(tampered.body.find("male_flirting"), 4, "fema");
  auto bad = h.service.Handle(tampered);
  c.Expect(bad.status == 401 && ErrorCodeOf(bad) == "BAD_MAC", "tampered body");
  c.Expect(h.Held() == 1, "rejected requests changed state");
  return {c.ok(), c.ok() ? "MAC = oracle (KAT + 100 random); REPLAY, STALE, BAD_MAC "
                           "rejected, state unchanged"
                         : c.failure()};
}

// ---------------------------------------------------------------------------
// 7. Simulator tradeoff.

Outcome SimulatorTradeoff() {
  Checker c;
  sim::SimConfig config;
  config.sources = {
      {GeoDesignation::Make("USA", "Indiana", "Bloomington"), 50.0},
      {GeoDesignation::Make("USA", "Montana", "Jordan"), 0.1},
  };
  config.horizon_days = 365;
  config.seed = 1;
  config.seeds = 20;
  double last = -1;
  std::string curve;
  double rural_k5 = 0, urban_k5 = 0;
  for (uint32_t k = 1; k <= 10; ++k) {
    config.policy = ReleasePolicy::WithK(k);
    auto runs = sim::SimulateSweep(config, analytics::Exec::kParallel);
    c.Expect(runs.size() == 20, "seed count");
    double weighted = 0, released = 0, rural = 0, rural_n = 0, urban = 0, urban_n = 0;
    for (const auto& r : runs) {
      c.Expect(r.conserved, "engine disagrees on pending");
      c.Expect(r.overall.arrivals == r.overall.released + r.overall.pending,
               "arrivals != released + pending");
      for (const auto& [d, s] : r.by_designation) {
        c.Expect(s.arrivals == s.released + s.pending, "row not conserved");
      }
      weighted += r.overall.mean_days.value_or(0) * r.overall.released;
      released += r.overall.released;
      const auto& u = r.by_designation[0].second;
      const auto& ru = r.by_designation[1].second;
      urban += u.mean_days.value_or(0) * u.released;
      urban_n += u.released;
      rural += ru.mean_days.value_or(0) * ru.released;
      rural_n += ru.released;
    }
    const double mean = weighted / released;
    c.Expect(mean >= last, Fmt("mean latency fell at k=%.0f", k));
    last = mean;
    curve += (k > 1 ? "," : "") + Fmt("%.3f", mean);
    if (k == 5) {
      rural_k5 = rural / rural_n;
      urban_k5 = urban / urban_n;
    }
  }
  c.Expect(rural_k5 >= 10 * urban_k5,
           Fmt("rural %.3f vs urban %.3f days", rural_k5, urban_k5));
  return {c.ok(), c.ok() ? "mean days by k=1..10: " + curve +
                               Fmt("; k=5 rural %.2f d vs urban %.3f d (%.0fx); conserved",
                                   rural_k5, urban_k5, rural_k5 / urban_k5)
                         : c.failure()};
}

// ---------------------------------------------------------------------------
// 8. Coordinates never cross the wire.

// Decimal-degree-looking numbers in `j`: every JSON number plus every
// decimal token inside strings.
void CollectNumbers(const json& j, std::vector<double>& out) {
  static const std::regex kDecimal(R"([-+]?\d{1,3}\.\d+)");
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    for (std::sregex_iterator it(s.begin(), s.end(), kDecimal), end; it != end; ++it) {
      out.push_back(std::stod(it->str()));
    }
  } else if (j.is_structured()) {
    for (const auto& [k, v] : j.items()) {
      json key = k;
      CollectNumbers(key, out);
      CollectNumbers(v, out);
    }
  }
}

bool HasLatLonPair(const std::vector<double>& xs) {
  for (size_t i = 0; i < xs.size(); ++i) {
    for (size_t j = 0; j < xs.size(); ++j) {
      if (i != j && std::abs(xs[i]) <= 90 && std::abs(xs[j]) <= 180) return true;
    }
  }
  return false;
}

Outcome SplitChannel() {
  Checker c;
  Harness h;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  const std::vector<std::string> names = {
      "lat", "lon", "lng", "latitude", "longitude", "Lat", "LONGITUDE", "coords",
      "coordinates", "location", "geo", "position", "gps", "point", "latlng",
      "x", "y", "geometry", "accuracy", "altitude"};
  auto coord_value = [&](int kind) -> json {
    const double a = lat(rng), b = lon(rng);
    switch (kind) {
      case 0: return a;
      case 1: return Fmt("%.5f", a);
      case 2: return json::array({b, a});
      case 3: return {{"lat", a}, {"lon", b}};
      case 4: return Fmt("%.4f,%.4f", a, b);
      default: return {{"type", "Point"}, {"coordinates", {b, a}}};
    }
  };
  const auto shapes = testing::RandomReports(TheCatalog(), 64, 9);
  const auto base_place = GeoDesignation::Make("USA", "Indiana", "Bloomington");

  uint64_t fuzzed = 0;
  for (int i = 0; i < 2000; ++i) {
    json p = ValidPayload(shapes[rng() % shapes.size()].selections, base_place);
    const std::string name = names[rng() % names.size()];
    const json value = coord_value(static_cast<int>(rng() % 6));
    switch (rng() % 6) {
      case 0: p[name] = value; break;
      case 1: p["designation"][name] = value; break;
      case 2: p["designation"]["city"] = Fmt("%.4f", lat(rng)); break;
      case 3: p["tags"].push_back(Fmt("%.4f,%.4f", lat(rng), lon(rng))); break;
      case 4: p["designation"]["province"] = value; break;
      default: p["meta"] = {{name, value}}; break;
    }
    const size_t before = h.Held();
    auto r = h.Post(p.dump());
    c.Expect(r.status == 400, "accepted fuzzed payload: " + p.dump());
    c.Expect(h.Held() == before, "fuzzed payload stored");
    ++fuzzed;
  }

  // Client path: coordinates are geocoded and coarsened before the payload
  // is built. Scan everything the service accepts.
  // The scanner itself must see a pair when one is there.
  for (const char* bad : {R"({"lat": 39.16, "lon": -86.52})",
                          R"({"designation": {"city": "39.1600,-86.5200"}})"}) {
    std::vector<double> numbers;
    CollectNumbers(json::parse(bad), numbers);
    c.Expect(HasLatLonPair(numbers), std::string("scanner missed ") + bad);
  }

  auto geocoder = geo::StubGeocoder::FromFile(kDataDir + "/geocoder_stub.json");
  uint64_t accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& box = geocoder.boxes()[rng() % geocoder.boxes().size()];
    std::uniform_real_distribution<double> la(box.lat_min, box.lat_max),
        lo(box.lon_min, box.lon_max);
    const double in_lat = la(rng), in_lon = lo(rng);
    auto d = geo::ReverseGeocode(geo::Coordinates::Make(in_lat, in_lon), geocoder);
    d = geo::Coarsen(d, static_cast<geo::Resolution>(rng() % 3));
    const std::string body =
        ValidPayload(shapes[rng() % shapes.size()].selections, d).dump();
    auto r = h.Post(body);
    if (r.status != 200 && r.status != 202) {
      c.Expect(false, "valid payload rejected: " + r.body);
      continue;
    }
    ++accepted;
    std::vector<double> numbers;
    CollectNumbers(json::parse(body), numbers);
    c.Expect(!HasLatLonPair(numbers), "lat/lon pair on the wire: " + body);
    for (const char* f : {"%.1f", "%.2f", "%.3f", "%.4f"}) {
      c.Expect(body.find(Fmt(f, in_lat)) == std::string::npos &&
                   body.find(Fmt(f, in_lon)) == std::string::npos,
               "input coordinate text on the wire");
    }
  }
  c.Expect(accepted == 1000, "accepted count");
  return {c.ok(), c.ok() ? Fmt("%.0f fuzzed payloads rejected with nothing stored; "
                               "%.0f accepted payloads carry no lat/lon",
                               fuzzed, accepted)
                         : c.failure()};
}

}  // namespace
}  // namespace geopool

int main() {
  using namespace geopool;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 k-anonymity streams", KAnonymityStreams},
      {"2 timestamp and order destruction", TimestampAndOrder},
      {"3 analytics oracle equivalence", AnalyticsOracles},
      {"4 fixture reproduction", FixtureReproduction},
      {"5 geometric null", GeometricNullCheck},
      {"6 auth", Auth},
      {"7 simulator tradeoff", SimulatorTradeoff},
      {"8 split channel", SplitChannel},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %s: %s - %s\n", name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
