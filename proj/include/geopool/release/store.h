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

#ifndef GEOPOOL_RELEASE_STORE_H_
#define GEOPOOL_RELEASE_STORE_H_

#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "geopool/geo/designation.h"
#include "geopool/release/policy.h"
#include "geopool/survey/report.h"
#include "json.hpp"

namespace geopool::release {

// A report in limbo. It has no time field of any kind.
struct PendingReport {
  std::string report_id;
  std::vector<std::string> selections;
  geo::GeoDesignation designation;

  friend bool operator==(const PendingReport&, const PendingReport&) = default;
};

struct ReleaseBatch {
  geo::GeoDesignation designation;
  std::vector<survey::PublicReport> reports;  // shuffled
  Timestamp released_at;
};

// One pending pool as persisted. opened_at is the truncated time the pool
// went from empty to non-empty; it is kept per pool (never per report) and
// only feeds stale-pool escalation.
struct PoolRecord {
  geo::GeoDesignation designation;
  Timestamp opened_at;
  std::vector<PendingReport> reports;  // arrival order
};

// Persistence behind the release engine. Pending and public report sets are
// disjoint; the public set is append-only. Implementations throw kUnavailable
// on storage failure and leave their state unchanged when they do.
class Store {
 public:
  virtual ~Store() = default;

  // Adds `r` to its designation's pool, creating the pool with `opened_at`
  // if it does not exist yet.
  virtual void InsertPending(const PendingReport& r, Timestamp opened_at) = 0;

  // Atomically removes the batch's reports from pending (and the pool if it
  // empties) and appends them to the public set.
  virtual void Publish(const ReleaseBatch& batch) = 0;

  // Re-keys a pending report under `to` (escalation). Same pool-creation
  // rule as InsertPending. Empty source pools are removed.
  virtual void MovePending(const std::string& report_id,
                           const geo::GeoDesignation& to,
                           Timestamp opened_at) = 0;

  virtual std::vector<PoolRecord> LoadPools() const = 0;

  // Ordered by (released_at, report_id).
  virtual std::vector<survey::PublicReport> PublicPage(size_t offset,
                                                       size_t limit) const = 0;
  virtual size_t PublicCount() const = 0;
  // One consistent snapshot of every public report.
  std::vector<survey::PublicReport> AllPublic() const {
    return PublicPage(0, std::numeric_limits<size_t>::max());
  }

  // Full dump of what is persisted, for audits and tests.
  virtual nlohmann::json DumpState() const = 0;
};

// In-process store. Thread-safe.
class MemoryStore : public Store {
 public:
  void InsertPending(const PendingReport& r, Timestamp opened_at) override;
  void Publish(const ReleaseBatch& batch) override;
  void MovePending(const std::string& report_id, const geo::GeoDesignation& to,
                   Timestamp opened_at) override;
  std::vector<PoolRecord> LoadPools() const override;
  std::vector<survey::PublicReport> PublicPage(size_t offset,
                                               size_t limit) const override;
  size_t PublicCount() const override;
  nlohmann::json DumpState() const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, PoolRecord> pools_;  // by designation key
  // Kept sorted by (released_at, report_id).
  std::vector<survey::PublicReport> public_;
};

nlohmann::json PendingToJson(const PendingReport& r);
nlohmann::json PublicToJson(const survey::PublicReport& r);

}  // namespace geopool::release

#endif  // GEOPOOL_RELEASE_STORE_H_
