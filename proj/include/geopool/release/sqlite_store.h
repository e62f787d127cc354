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

#ifndef GEOPOOL_RELEASE_SQLITE_STORE_H_
#define GEOPOOL_RELEASE_SQLITE_STORE_H_

#include <mutex>
#include <string>

#include "geopool/release/store.h"

struct sqlite3;

namespace geopool::release {

// SQLite-backed store. Tables:
//   pending(report_id, tags, country, province, city, resolution, pool_key)
//   pools(pool_key, opened_at)
//   public(report_id, tags, country, province, city, resolution, released_at)
// `pending` has no time column. `public` rejects UPDATE and DELETE via
// triggers. One connection serialized by a mutex.
class SqliteStore : public Store {
 public:
  // ":memory:" gives a private in-memory database.
  explicit SqliteStore(const std::string& path);
  ~SqliteStore() override;

  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  void InsertPending(const PendingReport& r, Timestamp opened_at) override;
  void Publish(const ReleaseBatch& batch) override;
  void MovePending(const std::string& report_id, const geo::GeoDesignation& to,
                   Timestamp opened_at) override;
  std::vector<PoolRecord> LoadPools() const override;
  std::vector<survey::PublicReport> PublicPage(size_t offset,
                                               size_t limit) const override;
  size_t PublicCount() const override;
  nlohmann::json DumpState() const override;

  // Column names of `table`, for schema audits.
  std::vector<std::string> Columns(const std::string& table) const;

 private:
  void Exec(const char* sql) const;

  mutable std::mutex mu_;
  sqlite3* db_ = nullptr;
};

}  // namespace geopool::release

#endif  // GEOPOOL_RELEASE_SQLITE_STORE_H_
