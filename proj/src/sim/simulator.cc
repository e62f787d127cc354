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

#include "geopool/sim/simulator.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "geopool/error.h"
#include "geopool/release/engine.h"
#include "geopool/release/store.h"
#include "geopool/sim/random.h"

namespace geopool::sim {

namespace {

using release::Timestamp;

constexpr double kSecondsPerDay = 86400.0;
// Virtual epoch; only differences matter, but truncation needs real dates.
const Timestamp kEpoch =
    std::chrono::sys_days(std::chrono::year(2020) / 1 / 1);

// The engine needs a store; the simulation keeps nothing durable.
class NullStore : public release::Store {
 public:
  void InsertPending(const release::PendingReport&, Timestamp) override {}
  void Publish(const release::ReleaseBatch&) override {}
  void MovePending(const std::string&, const geo::GeoDesignation&,
                   Timestamp) override {}
  std::vector<release::PoolRecord> LoadPools() const override { return {}; }
  std::vector<survey::PublicReport> PublicPage(size_t, size_t) const override {
    return {};
  }
  size_t PublicCount() const override { return 0; }
  nlohmann::json DumpState() const override { return nlohmann::json::object(); }
};

Timestamp ToTimestamp(double days) {
  return kEpoch + std::chrono::seconds(std::llround(days * kSecondsPerDay));
}

LatencyStats Summarize(std::vector<double> latencies, uint64_t arrivals,
                       uint64_t pending) {
  LatencyStats s;
  s.arrivals = arrivals;
  s.released = latencies.size();
  s.pending = pending;
  if (latencies.empty()) return s;
  std::sort(latencies.begin(), latencies.end());
  double sum = 0;
  for (double l : latencies) sum += l;
  const size_t n = latencies.size();
  s.mean_days = sum / n;
  s.median_days = n % 2 ? latencies[n / 2]
                        : (latencies[n / 2 - 1] + latencies[n / 2]) / 2;
  s.max_days = latencies.back();
  return s;
}

nlohmann::json StatsJson(const LatencyStats& s) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"arrivals", s.arrivals},
          {"released", s.released},
          {"pending", s.pending},
          {"fraction_pending", s.fraction_pending()},
          {"mean_days", opt(s.mean_days)},
          {"median_days", opt(s.median_days)},
          {"max_days", opt(s.max_days)}};
}

}  // namespace

void SimConfig::Validate() const {
  policy.Validate();
  if (!(horizon_days > 0)) throw InvalidArgumentError("horizon_days must be > 0");
  if (seeds < 1) throw InvalidArgumentError("seeds must be >= 1");
  std::set<std::string> keys;
  for (const auto& s : sources) {
    if (!(s.rate_per_day >= 0) || !std::isfinite(s.rate_per_day)) {
      throw InvalidArgumentError("rate_per_day must be finite and >= 0");
    }
    if (!keys.insert(s.designation.Key()).second) {
      throw InvalidArgumentError("designation listed twice: " +
                                 s.designation.ToString());
    }
  }
}

SimConfig ParseSimConfig(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "designations", "k",          "k_country",        "k_province",
      "k_city",       "granularity", "granularity_seconds", "escalation_after",
      "horizon_days", "seed",        "seeds"};
  if (!j.is_object()) throw ParseError("simulation config must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.contains(k)) throw ParseError("unknown field '" + k + "' in config");
  }
  try {
    SimConfig c;
    c.policy = release::PolicyFromJson(j);
    c.horizon_days = j.at("horizon_days").get<double>();
    c.seed = j.value("seed", uint64_t{1});
    c.seeds = j.value("seeds", 1u);
    for (const auto& d : j.at("designations")) {
      for (const auto& [k, v] : d.items()) {
        if (k != "country" && k != "province" && k != "city" &&
            k != "rate_per_day") {
          throw ParseError("unknown field '" + k + "' in designation");
        }
      }
      std::optional<std::string> province, city;
      if (d.contains("province")) province = d["province"].get<std::string>();
      if (d.contains("city")) city = d["city"].get<std::string>();
      c.sources.push_back(
          {geo::GeoDesignation::Make(
               d.at("country").get<std::string>(),
               province ? std::optional<std::string_view>(*province) : std::nullopt,
               city ? std::optional<std::string_view>(*city) : std::nullopt),
           d.at("rate_per_day").get<double>()});
    }
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad simulation config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw ParseError(std::string("bad simulation config: ") + e.what());
  }
}

LatencyReport Simulate(const SimConfig& config, uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  NullStore store;
  release::ReleaseEngine engine(config.policy, store, seed);

  const size_t n = config.sources.size();
  std::vector<uint64_t> arrivals(n, 0);
  std::vector<std::vector<double>> latencies(n);
  struct Waiting {
    uint32_t source;
    double arrived;
  };
  std::unordered_map<std::string, Waiting> waiting;

  // (time, tag): tag 0 is a maintenance pass, tag i + 1 an arrival at
  // source i. Ties go to maintenance first, then by source.
  using Event = std::pair<double, size_t>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  for (size_t i = 0; i < n; ++i) {
    if (config.sources[i].rate_per_day > 0) {
      events.push({Exponential(rng, config.sources[i].rate_per_day), i + 1});
    }
  }
  const double unit_days = config.policy.granularity.count() / kSecondsPerDay;
  if (config.policy.escalation_after) events.push({unit_days, 0});

  LatencyReport report;
  report.seed = seed;
  auto record = [&](const release::ReleaseBatch& batch, double now) {
    ++report.batches;
    for (const auto& r : batch.reports) {
      auto it = waiting.find(r.report_id);
      latencies[it->second.source].push_back(now - it->second.arrived);
      waiting.erase(it);
    }
  };

  uint64_t next_id = 0;
  while (!events.empty()) {
    auto [t, tag] = events.top();
    if (t > config.horizon_days) break;
    events.pop();
    if (tag == 0) {
      auto result = engine.EscalateStale(ToTimestamp(t));
      report.escalations += result.moves.size();
      for (const auto& b : result.batches) record(b, t);
      events.push({t + unit_days, 0});
      continue;
    }
    const size_t i = tag - 1;
    const auto& src = config.sources[i];
    std::string id = std::to_string(next_id++);
    waiting.emplace(id, Waiting{static_cast<uint32_t>(i), t});
    ++arrivals[i];
    if (auto batch = engine.Enqueue({id, {}, src.designation}, ToTimestamp(t))) {
      record(*batch, t);
    }
    events.push({t + Exponential(rng, src.rate_per_day), tag});
  }

  std::vector<uint64_t> pending(n, 0);
  for (const auto& [id, w] : waiting) ++pending[w.source];
  report.conserved = engine.TotalPending() == waiting.size();
  std::vector<double> by_res[3], all;
  uint64_t res_arrivals[3] = {0, 0, 0}, res_pending[3] = {0, 0, 0};
  for (size_t i = 0; i < n; ++i) {
    const auto& d = config.sources[i].designation;
    const int r = static_cast<int>(d.resolution());
    report.conserved = report.conserved &&
                       arrivals[i] == latencies[i].size() + pending[i];
    res_arrivals[r] += arrivals[i];
    res_pending[r] += pending[i];
    by_res[r].insert(by_res[r].end(), latencies[i].begin(), latencies[i].end());
    all.insert(all.end(), latencies[i].begin(), latencies[i].end());
    report.by_designation.emplace_back(
        d, Summarize(std::move(latencies[i]), arrivals[i], pending[i]));
  }
  for (int r = 0; r < 3; ++r) {
    report.by_resolution[r] =
        Summarize(std::move(by_res[r]), res_arrivals[r], res_pending[r]);
  }
  uint64_t total_arrivals = 0;
  for (uint64_t a : arrivals) total_arrivals += a;
  report.overall = Summarize(std::move(all), total_arrivals, waiting.size());
  return report;
}

std::vector<LatencyReport> SimulateSweep(const SimConfig& config,
                                         analytics::Exec exec) {
  config.Validate();
  std::vector<LatencyReport> out(config.seeds);
  const auto count = static_cast<int64_t>(config.seeds);
  if (exec == analytics::Exec::kSerial) {
    for (int64_t i = 0; i < count; ++i) out[i] = Simulate(config, config.seed + i);
    return out;
  }
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < count; ++i) out[i] = Simulate(config, config.seed + i);
  return out;
}

nlohmann::json ToJson(const LatencyReport& r) {
  nlohmann::json j = {{"seed", r.seed},
                      {"batches", r.batches},
                      {"escalations", r.escalations},
                      {"conserved", r.conserved},
                      {"overall", StatsJson(r.overall)}};
  j["designations"] = nlohmann::json::array();
  for (const auto& [d, s] : r.by_designation) {
    auto row = StatsJson(s);
    row["designation"] = geo::ToJson(d);
    j["designations"].push_back(std::move(row));
  }
  j["resolutions"] = nlohmann::json::object();
  for (int i = 0; i < 3; ++i) {
    j["resolutions"][std::string(geo::ResolutionName(
        static_cast<geo::Resolution>(i)))] = StatsJson(r.by_resolution[i]);
  }
  return j;
}

std::string ToCsv(const std::vector<LatencyReport>& reports) {
  std::ostringstream out;
  out << "seed,scope,name,arrivals,released,pending,fraction_pending,"
         "mean_days,median_days,max_days\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  auto row = [&](uint64_t seed, std::string_view scope, const std::string& name,
                 const LatencyStats& s) {
    out << seed << ',' << scope << ',' << name << ',' << s.arrivals << ','
        << s.released << ',' << s.pending << ',' << s.fraction_pending() << ','
        << opt(s.mean_days) << ',' << opt(s.median_days) << ','
        << opt(s.max_days) << '\n';
  };
  for (const auto& r : reports) {
    for (const auto& [d, s] : r.by_designation) row(r.seed, "designation", d.Key(), s);
    for (int i = 0; i < 3; ++i) {
      row(r.seed, "resolution",
          std::string(geo::ResolutionName(static_cast<geo::Resolution>(i))),
          r.by_resolution[i]);
    }
    row(r.seed, "overall", "all", r.overall);
  }
  return out.str();
}

}  // namespace geopool::sim
