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

// Geo-temporal k-anonymous release.
//
// Incoming reports are pooled by their exact designation with no timestamp.
// When a pool reaches the k for its resolution, the whole pool is published
// as one batch: every report gets the same release time, truncated to the
// policy granularity, and the batch order is a fresh random permutation.
// Nothing is ever public outside such a batch.
//
// Optionally, pools left waiting for `escalation_after` granularity units
// are coarsened one level (city -> province -> country) and merged into
// the parent pool, trading location precision for release latency.

#ifndef GEOPOOL_RELEASE_ENGINE_H_
#define GEOPOOL_RELEASE_ENGINE_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "geopool/release/policy.h"
#include "geopool/release/store.h"

namespace geopool::release {

struct EscalationMove {
  std::string report_id;
  geo::GeoDesignation from;
  geo::GeoDesignation to;
};

struct EscalationResult {
  std::vector<EscalationMove> moves;
  std::vector<ReleaseBatch> batches;  // parent pools that reached k
};

class ReleaseEngine {
 public:
  // Shuffles are seeded from `seed`; use this form in tests and simulations.
  ReleaseEngine(ReleasePolicy policy, Store& store, uint64_t seed);
  // Seeds the shuffle RNG from the OS entropy source.
  ReleaseEngine(ReleasePolicy policy, Store& store);

  ReleaseEngine(const ReleaseEngine&) = delete;
  ReleaseEngine& operator=(const ReleaseEngine&) = delete;

  // Adds `report` to its pool and drains the pool if it reached k. Atomic per
  // designation. Throws kUnavailable (and keeps nothing) if the store rejects
  // the insert; a failed publish leaves the report pending for the next
  // drain.
  std::optional<ReleaseBatch> Enqueue(PendingReport report, Timestamp now);

  // Current pool size for `d`. Operator-only: never expose this publicly.
  size_t PendingCount(const geo::GeoDesignation& d) const;
  size_t TotalPending() const;

  // Escalates every pool that has been open for at least escalation_after
  // granularity units, moving each report up exactly one level. Escalated
  // reports count toward the parent's k and may complete a parent batch.
  // No-op when escalation is disabled.
  EscalationResult EscalateStale(Timestamp now);

  const ReleasePolicy& policy() const { return policy_; }

  // Pools as held in memory (designation, opened_at, pending reports).
  nlohmann::json DumpState() const;

 private:
  struct Pool {
    std::mutex mu;
    std::optional<geo::GeoDesignation> designation;
    Timestamp opened_at{};
    std::vector<PendingReport> reports;  // arrival order
  };

  Pool& PoolFor(const geo::GeoDesignation& d);
  std::vector<std::pair<std::string, Pool*>> SnapshotPools() const;
  // Caller holds pool.mu.
  std::optional<ReleaseBatch> DrainIfReady(Pool& pool, Timestamp now);
  uint64_t NextShuffleSeed();

  ReleasePolicy policy_;
  Store& store_;

  mutable std::mutex pools_mu_;  // guards the map, not the pools
  std::unordered_map<std::string, std::unique_ptr<Pool>> pools_;

  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

}  // namespace geopool::release

#endif  // GEOPOOL_RELEASE_ENGINE_H_
