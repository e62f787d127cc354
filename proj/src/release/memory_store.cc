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

#include <algorithm>
#include <set>

#include "geopool/error.h"
#include "geopool/release/store.h"

namespace geopool::release {

namespace {

bool PublicLess(const survey::PublicReport& a, const survey::PublicReport& b) {
  return std::tie(a.released_at, a.report_id) <
         std::tie(b.released_at, b.report_id);
}

}  // namespace

nlohmann::json PendingToJson(const PendingReport& r) {
  return {{"report_id", r.report_id},
          {"tags", r.selections},
          {"designation", geo::ToJson(r.designation)}};
}

nlohmann::json PublicToJson(const survey::PublicReport& r) {
  return {{"report_id", r.report_id},
          {"tags", r.selections},
          {"designation", geo::ToJson(r.designation)},
          {"released_at", r.released_at.time_since_epoch().count()}};
}

void MemoryStore::InsertPending(const PendingReport& r, Timestamp opened_at) {
  std::lock_guard lock(mu_);
  std::string key = r.designation.Key();
  auto it = pools_.find(key);
  if (it == pools_.end()) {
    it = pools_.emplace(key, PoolRecord{r.designation, opened_at, {}}).first;
  }
  it->second.reports.push_back(r);
}

void MemoryStore::Publish(const ReleaseBatch& batch) {
  std::lock_guard lock(mu_);
  std::set<std::string> ids;
  for (const auto& r : batch.reports) ids.insert(r.report_id);
  if (auto it = pools_.find(batch.designation.Key()); it != pools_.end()) {
    auto& reports = it->second.reports;
    std::erase_if(reports, [&](const PendingReport& p) {
      return ids.contains(p.report_id);
    });
    if (reports.empty()) pools_.erase(it);
  }
  for (const auto& r : batch.reports) {
    public_.insert(std::upper_bound(public_.begin(), public_.end(), r, PublicLess),
                   r);
  }
}

void MemoryStore::MovePending(const std::string& report_id,
                              const geo::GeoDesignation& to,
                              Timestamp opened_at) {
  std::lock_guard lock(mu_);
  for (auto it = pools_.begin(); it != pools_.end(); ++it) {
    auto& reports = it->second.reports;
    auto found = std::find_if(reports.begin(), reports.end(),
                              [&](const auto& p) { return p.report_id == report_id; });
    if (found == reports.end()) continue;
    PendingReport moved = *found;
    moved.designation = to;
    reports.erase(found);
    if (reports.empty()) pools_.erase(it);
    std::string key = to.Key();
    auto dst = pools_.find(key);
    if (dst == pools_.end()) {
      dst = pools_.emplace(key, PoolRecord{to, opened_at, {}}).first;
    }
    dst->second.reports.push_back(std::move(moved));
    return;
  }
  throw NotFoundError("no pending report " + report_id);
}

std::vector<PoolRecord> MemoryStore::LoadPools() const {
  std::lock_guard lock(mu_);
  std::vector<PoolRecord> out;
  out.reserve(pools_.size());
  for (const auto& [key, pool] : pools_) out.push_back(pool);
  return out;
}

std::vector<survey::PublicReport> MemoryStore::PublicPage(size_t offset,
                                                          size_t limit) const {
  std::lock_guard lock(mu_);
  if (offset >= public_.size()) return {};
  size_t end = offset + std::min(limit, public_.size() - offset);
  return {public_.begin() + static_cast<ptrdiff_t>(offset),
          public_.begin() + static_cast<ptrdiff_t>(end)};
}

size_t MemoryStore::PublicCount() const {
  std::lock_guard lock(mu_);
  return public_.size();
}

nlohmann::json MemoryStore::DumpState() const {
  std::lock_guard lock(mu_);
  nlohmann::json j;
  j["pools"] = nlohmann::json::array();
  for (const auto& [key, pool] : pools_) {
    nlohmann::json p = {{"designation", geo::ToJson(pool.designation)},
                        {"opened_at", pool.opened_at.time_since_epoch().count()}};
    p["reports"] = nlohmann::json::array();
    for (const auto& r : pool.reports) p["reports"].push_back(PendingToJson(r));
    j["pools"].push_back(std::move(p));
  }
  j["public"] = nlohmann::json::array();
  for (const auto& r : public_) j["public"].push_back(PublicToJson(r));
  return j;
}

}  // namespace geopool::release
