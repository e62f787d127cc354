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

#include "geopool/release/engine.h"

#include <algorithm>
#include <set>

#include "geopool/error.h"

namespace geopool::release {

namespace {

uint64_t EntropySeed() {
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

ReleaseEngine::ReleaseEngine(ReleasePolicy policy, Store& store, uint64_t seed)
    : policy_(std::move(policy)), store_(store), rng_(seed) {
  policy_.Validate();
  for (auto& record : store_.LoadPools()) {
    auto pool = std::make_unique<Pool>();
    pool->designation = record.designation;
    pool->opened_at = record.opened_at;
    pool->reports = std::move(record.reports);
    pools_.emplace(record.designation.Key(), std::move(pool));
  }
}

ReleaseEngine::ReleaseEngine(ReleasePolicy policy, Store& store)
    : ReleaseEngine(std::move(policy), store, EntropySeed()) {}

ReleaseEngine::Pool& ReleaseEngine::PoolFor(const geo::GeoDesignation& d) {
  std::lock_guard lock(pools_mu_);
  auto& slot = pools_[d.Key()];
  if (!slot) {
    slot = std::make_unique<Pool>();
    slot->designation = d;
  }
  return *slot;
}

std::vector<std::pair<std::string, ReleaseEngine::Pool*>>
ReleaseEngine::SnapshotPools() const {
  std::lock_guard lock(pools_mu_);
  std::vector<std::pair<std::string, Pool*>> out;
  out.reserve(pools_.size());
  for (const auto& [key, pool] : pools_) out.emplace_back(key, pool.get());
  return out;
}

uint64_t ReleaseEngine::NextShuffleSeed() {
  std::lock_guard lock(rng_mu_);
  return rng_();
}

std::optional<ReleaseBatch> ReleaseEngine::Enqueue(PendingReport report,
                                                   Timestamp now) {
  Pool& pool = PoolFor(report.designation);
  std::lock_guard lock(pool.mu);
  const bool fresh = pool.reports.empty();
  const Timestamp opened = fresh ? policy_.Truncate(now) : pool.opened_at;
  store_.InsertPending(report, opened);
  if (fresh) pool.opened_at = opened;
  pool.reports.push_back(std::move(report));
  return DrainIfReady(pool, now);
}

std::optional<ReleaseBatch> ReleaseEngine::DrainIfReady(Pool& pool,
                                                        Timestamp now) {
  const geo::GeoDesignation& d = *pool.designation;
  if (pool.reports.size() < policy_.KFor(d.resolution())) return std::nullopt;

  ReleaseBatch batch{d, {}, policy_.Truncate(now)};
  batch.reports.reserve(pool.reports.size());
  for (const auto& r : pool.reports) {
    batch.reports.push_back({r.report_id, r.selections, r.designation,
                             batch.released_at});
  }
  std::mt19937_64 shuffle_rng(NextShuffleSeed());
  std::shuffle(batch.reports.begin(), batch.reports.end(), shuffle_rng);

  try {
    store_.Publish(batch);
  } catch (const Error& e) {
    // The reports are durably pending; the next arrival retries the drain.
    if (e.retryable()) return std::nullopt;
    throw;
  }
  pool.reports.clear();
  return batch;
}

size_t ReleaseEngine::PendingCount(const geo::GeoDesignation& d) const {
  Pool* pool = nullptr;
  {
    std::lock_guard lock(pools_mu_);
    auto it = pools_.find(d.Key());
    if (it == pools_.end()) return 0;
    pool = it->second.get();
  }
  std::lock_guard lock(pool->mu);
  return pool->reports.size();
}

size_t ReleaseEngine::TotalPending() const {
  size_t total = 0;
  for (const auto& [key, pool] : SnapshotPools()) {
    std::lock_guard lock(pool->mu);
    total += pool->reports.size();
  }
  return total;
}

EscalationResult ReleaseEngine::EscalateStale(Timestamp now) {
  EscalationResult result;
  if (!policy_.escalation_after) return result;
  const int64_t after = *policy_.escalation_after;

  // Decide staleness up front so reports escalated in this pass are not
  // pushed further in the same pass.
  struct Stale {
    Pool* pool;
    geo::GeoDesignation designation;
    std::set<std::string> ids;
  };
  std::vector<Stale> stale;
  for (const auto& [key, pool] : SnapshotPools()) {
    std::lock_guard lock(pool->mu);
    if (pool->reports.empty()) continue;
    if (pool->designation->resolution() == geo::Resolution::kCountry) continue;
    if (policy_.ElapsedUnits(pool->opened_at, now) < after) continue;
    Stale s{pool, *pool->designation, {}};
    for (const auto& r : pool->reports) s.ids.insert(r.report_id);
    stale.push_back(std::move(s));
  }
  // Coarsest first, so a stale province pool is emptied before its stale
  // cities move in and those arrivals start a fresh pool. Ties by key.
  std::sort(stale.begin(), stale.end(), [](const Stale& a, const Stale& b) {
    if (a.designation.resolution() != b.designation.resolution()) {
      return a.designation.resolution() < b.designation.resolution();
    }
    return a.designation.Key() < b.designation.Key();
  });

  for (auto& s : stale) {
    geo::GeoDesignation parent_d = *geo::Parent(s.designation);
    Pool& parent = PoolFor(parent_d);
    std::scoped_lock lock(s.pool->mu, parent.mu);

    std::vector<PendingReport> keep;
    bool store_failed = false;
    for (auto& r : s.pool->reports) {
      if (store_failed || !s.ids.contains(r.report_id)) {
        keep.push_back(std::move(r));
        continue;
      }
      const bool fresh = parent.reports.empty();
      const Timestamp opened = fresh ? policy_.Truncate(now) : parent.opened_at;
      try {
        store_.MovePending(r.report_id, parent_d, opened);
      } catch (const Error& e) {
        if (!e.retryable()) throw;
        store_failed = true;  // retry on the next maintenance pass
        keep.push_back(std::move(r));
        continue;
      }
      if (fresh) parent.opened_at = opened;
      result.moves.push_back({r.report_id, s.designation, parent_d});
      r.designation = parent_d;
      parent.reports.push_back(std::move(r));
    }
    s.pool->reports = std::move(keep);
    if (auto batch = DrainIfReady(parent, now)) {
      result.batches.push_back(std::move(*batch));
    }
  }
  return result;
}

nlohmann::json ReleaseEngine::DumpState() const {
  nlohmann::json j = nlohmann::json::array();
  auto pools = SnapshotPools();
  std::sort(pools.begin(), pools.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, pool] : pools) {
    std::lock_guard lock(pool->mu);
    if (pool->reports.empty()) continue;
    nlohmann::json p = {{"designation", geo::ToJson(*pool->designation)},
                        {"opened_at", pool->opened_at.time_since_epoch().count()}};
    p["reports"] = nlohmann::json::array();
    for (const auto& r : pool->reports) p["reports"].push_back(PendingToJson(r));
    j.push_back(std::move(p));
  }
  return j;
}

}  // namespace geopool::release
