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

// Discrete-event simulation of limbo latency under a release policy.
//
// Each designation receives Poisson arrivals at its own rate. Arrivals are
// fed through a real ReleaseEngine on a virtual clock; when escalation is
// enabled a maintenance pass runs at every granularity boundary. Latency is
// the virtual time from a report's arrival to the publication of its batch.
// Simulation of one seed is single-threaded and deterministic.
//
// Config (JSON):
//   {"designations": [{"country": "USA", "province": "Indiana",
//                      "city": "Bloomington", "rate_per_day": 3.5}, ...],
//    "k": 5,  or "k_country"/"k_province"/"k_city",
//    "granularity": "day", "escalation_after": 7,
//    "horizon_days": 365, "seed": 1, "seeds": 20}

#ifndef GEOPOOL_SIM_SIMULATOR_H_
#define GEOPOOL_SIM_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geopool/analytics/kernels.h"
#include "geopool/geo/designation.h"
#include "geopool/release/policy.h"
#include "json.hpp"

namespace geopool::sim {

struct ArrivalSource {
  geo::GeoDesignation designation;
  double rate_per_day = 0;
};

struct SimConfig {
  std::vector<ArrivalSource> sources;
  release::ReleasePolicy policy;
  double horizon_days = 365;
  uint64_t seed = 1;
  uint32_t seeds = 1;  // for sweeps: seed, seed + 1, ...

  // Throws kInvalidArgument for a non-positive horizon, a negative rate,
  // duplicate designations or an invalid policy.
  void Validate() const;
};

// Throws kParse for malformed input or unknown keys.
SimConfig ParseSimConfig(const nlohmann::json& j);

struct LatencyStats {
  uint64_t arrivals = 0;
  uint64_t released = 0;
  uint64_t pending = 0;  // still in limbo at the horizon
  std::optional<double> mean_days, median_days, max_days;  // released only

  double fraction_pending() const {
    return arrivals == 0 ? 0.0 : static_cast<double>(pending) / arrivals;
  }
};

struct LatencyReport {
  uint64_t seed = 0;
  // One row per configured source, in config order, keyed by where the
  // report was submitted (escalated reports stay with their origin).
  std::vector<std::pair<geo::GeoDesignation, LatencyStats>> by_designation;
  // Pooled over sources of each resolution: country, province, city.
  LatencyStats by_resolution[3];
  LatencyStats overall;
  uint64_t batches = 0;
  uint64_t escalations = 0;
  // arrivals == released + pending for every row, and the engine agrees on
  // the pending total.
  bool conserved = false;
};

LatencyReport Simulate(const SimConfig& config, uint64_t seed);

// config.seeds runs starting at config.seed. The parallel form spreads seeds
// over OpenMP threads and returns the same reports in the same order.
std::vector<LatencyReport> SimulateSweep(const SimConfig& config,
                                         analytics::Exec exec);

nlohmann::json ToJson(const LatencyReport& r);
// One row per designation and per resolution.
std::string ToCsv(const std::vector<LatencyReport>& reports);

}  // namespace geopool::sim

#endif  // GEOPOOL_SIM_SIMULATOR_H_
