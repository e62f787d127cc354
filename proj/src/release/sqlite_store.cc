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

#include "geopool/release/sqlite_store.h"

#include <sqlite3.h>

#include <algorithm>
#include <cstdint>

#include "geopool/error.h"

namespace geopool::release {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS pools (
  pool_key   TEXT PRIMARY KEY,
  opened_at  INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS pending (
  report_id  TEXT PRIMARY KEY,
  tags       TEXT NOT NULL,
  country    TEXT NOT NULL,
  province   TEXT,
  city       TEXT,
  resolution TEXT NOT NULL,
  pool_key   TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS pending_by_pool ON pending(pool_key);
CREATE TABLE IF NOT EXISTS public (
  report_id   TEXT PRIMARY KEY,
  tags        TEXT NOT NULL,
  country     TEXT NOT NULL,
  province    TEXT,
  city        TEXT,
  resolution  TEXT NOT NULL,
  released_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS public_order ON public(released_at, report_id);
CREATE TRIGGER IF NOT EXISTS public_no_update BEFORE UPDATE ON public
  BEGIN SELECT RAISE(ABORT, 'public reports are append-only'); END;
CREATE TRIGGER IF NOT EXISTS public_no_delete BEFORE DELETE ON public
  BEGIN SELECT RAISE(ABORT, 'public reports are append-only'); END;
)sql";

[[noreturn]] void Fail(sqlite3* db, int rc, const std::string& what) {
  std::string msg = what + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
  int primary = rc & 0xff;
  if (primary == SQLITE_CONSTRAINT || primary == SQLITE_MISUSE ||
      primary == SQLITE_ERROR) {
    throw InternalError(msg);
  }
  throw UnavailableError(msg);
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    int rc = sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr);
    if (rc != SQLITE_OK) Fail(db, rc, "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& Bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()),
                      SQLITE_TRANSIENT);
    return *this;
  }
  Statement& Bind(int i, const std::optional<std::string>& v) {
    if (!v) {
      sqlite3_bind_null(stmt_, i);
      return *this;
    }
    return Bind(i, *v);
  }
  Statement& Bind(int i, int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }

  // True while rows remain.
  bool Step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    Fail(db_, rc, "step");
  }
  void Run() {
    while (Step()) {
    }
  }

  std::string Text(int col) const {
    auto* p = sqlite3_column_text(stmt_, col);
    return p ? reinterpret_cast<const char*>(p) : "";
  }
  std::optional<std::string> OptionalText(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return Text(col);
  }
  int64_t Int(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) {
    Statement(db_, "BEGIN IMMEDIATE").Run();
  }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void Commit() {
    Statement(db_, "COMMIT").Run();
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

geo::GeoDesignation ReadDesignation(const Statement& s, int first_col) {
  auto province = s.OptionalText(first_col + 1);
  auto city = s.OptionalText(first_col + 2);
  std::optional<std::string_view> p, c;
  if (province) p = *province;
  if (city) c = *city;
  return geo::GeoDesignation::Make(s.Text(first_col), p, c);
}

std::vector<std::string> ReadTags(const Statement& s, int col) {
  return nlohmann::json::parse(s.Text(col)).get<std::vector<std::string>>();
}

void EnsurePool(sqlite3* db, const std::string& key, Timestamp opened_at) {
  Statement(db, "INSERT OR IGNORE INTO pools(pool_key, opened_at) VALUES(?, ?)")
      .Bind(1, key)
      .Bind(2, opened_at.time_since_epoch().count())
      .Run();
}

void DropPoolIfEmpty(sqlite3* db, const std::string& key) {
  Statement(db,
            "DELETE FROM pools WHERE pool_key = ?1 AND NOT EXISTS "
            "(SELECT 1 FROM pending WHERE pool_key = ?1)")
      .Bind(1, key)
      .Run();
}

}  // namespace

SqliteStore::SqliteStore(const std::string& path) {
  int rc = sqlite3_open(path.c_str(), &db_);
  if (rc != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : sqlite3_errstr(rc);
    sqlite3_close(db_);
    db_ = nullptr;
    throw UnavailableError("cannot open store " + path + ": " + msg);
  }
  Exec("PRAGMA journal_mode=WAL");
  Exec("PRAGMA synchronous=NORMAL");
  Exec(kSchema);
}

SqliteStore::~SqliteStore() { sqlite3_close(db_); }

void SqliteStore::Exec(const char* sql) const {
  char* err = nullptr;
  int rc = sqlite3_exec(db_, sql, nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : "exec failed";
    sqlite3_free(err);
    throw UnavailableError("sqlite: " + msg);
  }
}

void SqliteStore::InsertPending(const PendingReport& r, Timestamp opened_at) {
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  const std::string key = r.designation.Key();
  EnsurePool(db_, key, opened_at);
  Statement(db_,
            "INSERT INTO pending(report_id, tags, country, province, city, "
            "resolution, pool_key) VALUES(?, ?, ?, ?, ?, ?, ?)")
      .Bind(1, r.report_id)
      .Bind(2, nlohmann::json(r.selections).dump())
      .Bind(3, r.designation.country())
      .Bind(4, r.designation.province())
      .Bind(5, r.designation.city())
      .Bind(6, std::string(geo::ResolutionName(r.designation.resolution())))
      .Bind(7, key)
      .Run();
  tx.Commit();
}

void SqliteStore::Publish(const ReleaseBatch& batch) {
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  for (const auto& r : batch.reports) {
    Statement(db_, "DELETE FROM pending WHERE report_id = ?")
        .Bind(1, r.report_id)
        .Run();
    Statement(db_,
              "INSERT INTO public(report_id, tags, country, province, city, "
              "resolution, released_at) VALUES(?, ?, ?, ?, ?, ?, ?)")
        .Bind(1, r.report_id)
        .Bind(2, nlohmann::json(r.selections).dump())
        .Bind(3, r.designation.country())
        .Bind(4, r.designation.province())
        .Bind(5, r.designation.city())
        .Bind(6, std::string(geo::ResolutionName(r.designation.resolution())))
        .Bind(7, r.released_at.time_since_epoch().count())
        .Run();
  }
  DropPoolIfEmpty(db_, batch.designation.Key());
  tx.Commit();
}

void SqliteStore::MovePending(const std::string& report_id,
                              const geo::GeoDesignation& to,
                              Timestamp opened_at) {
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  std::string from_key;
  {
    Statement s(db_, "SELECT pool_key FROM pending WHERE report_id = ?");
    s.Bind(1, report_id);
    if (!s.Step()) throw NotFoundError("no pending report " + report_id);
    from_key = s.Text(0);
  }
  const std::string to_key = to.Key();
  EnsurePool(db_, to_key, opened_at);
  Statement(db_,
            "UPDATE pending SET country = ?, province = ?, city = ?, "
            "resolution = ?, pool_key = ? WHERE report_id = ?")
      .Bind(1, to.country())
      .Bind(2, to.province())
      .Bind(3, to.city())
      .Bind(4, std::string(geo::ResolutionName(to.resolution())))
      .Bind(5, to_key)
      .Bind(6, report_id)
      .Run();
  DropPoolIfEmpty(db_, from_key);
  tx.Commit();
}

std::vector<PoolRecord> SqliteStore::LoadPools() const {
  std::lock_guard lock(mu_);
  std::vector<PoolRecord> out;
  Statement pools(db_, "SELECT pool_key, opened_at FROM pools ORDER BY pool_key");
  while (pools.Step()) {
    Statement rows(db_,
                   "SELECT report_id, tags, country, province, city FROM pending "
                   "WHERE pool_key = ? ORDER BY rowid");
    rows.Bind(1, pools.Text(0));
    std::vector<PendingReport> reports;
    while (rows.Step()) {
      reports.push_back({rows.Text(0), ReadTags(rows, 1), ReadDesignation(rows, 2)});
    }
    if (reports.empty()) continue;
    geo::GeoDesignation d = reports.front().designation;
    out.push_back({std::move(d), Timestamp(std::chrono::seconds(pools.Int(1))),
                   std::move(reports)});
  }
  return out;
}

std::vector<survey::PublicReport> SqliteStore::PublicPage(size_t offset,
                                                          size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<survey::PublicReport> out;
  Statement s(db_,
              "SELECT report_id, tags, country, province, city, released_at "
              "FROM public ORDER BY released_at, report_id LIMIT ? OFFSET ?");
  s.Bind(1, static_cast<int64_t>(std::min<size_t>(limit, INT64_MAX))).Bind(2, static_cast<int64_t>(offset));
  while (s.Step()) {
    out.push_back({s.Text(0), ReadTags(s, 1), ReadDesignation(s, 2),
                   Timestamp(std::chrono::seconds(s.Int(5)))});
  }
  return out;
}

size_t SqliteStore::PublicCount() const {
  std::lock_guard lock(mu_);
  Statement s(db_, "SELECT COUNT(*) FROM public");
  s.Step();
  return static_cast<size_t>(s.Int(0));
}

std::vector<std::string> SqliteStore::Columns(const std::string& table) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> cols;
  Statement s(db_, "SELECT name FROM pragma_table_info(?)");
  s.Bind(1, table);
  while (s.Step()) cols.push_back(s.Text(0));
  return cols;
}

nlohmann::json SqliteStore::DumpState() const {
  nlohmann::json j;
  j["pools"] = nlohmann::json::array();
  for (const auto& pool : LoadPools()) {
    nlohmann::json p = {{"designation", geo::ToJson(pool.designation)},
                        {"opened_at", pool.opened_at.time_since_epoch().count()}};
    p["reports"] = nlohmann::json::array();
    for (const auto& r : pool.reports) p["reports"].push_back(PendingToJson(r));
    j["pools"].push_back(std::move(p));
  }
  j["public"] = nlohmann::json::array();
  for (const auto& r : AllPublic()) j["public"].push_back(PublicToJson(r));
  return j;
}

}  // namespace geopool::release
