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

#include <sqlite3.h>

#include <filesystem>

#include <gtest/gtest.h>

#include "flaky_store.h"
#include "geopool/error.h"
#include "geopool/release/engine.h"
#include "geopool/release/sqlite_store.h"

namespace geopool::release {
namespace {

using geo::GeoDesignation;
using testing::MakePending;

const GeoDesignation kIndiana = GeoDesignation::Make("USA", "Indiana");
const GeoDesignation kBloomington =
    GeoDesignation::Make("USA", "Indiana", "Bloomington");
const Timestamp kDay = Timestamp(std::chrono::seconds(86400 * 16000));

std::string TempDb(const std::string& name) {
  auto path = std::filesystem::temp_directory_path() /
              (name + "_" + std::to_string(::getpid()) + ".db");
  std::filesystem::remove(path);
  return path.string();
}

template <typename T>
class StoreContractTest : public ::testing::Test {
 protected:
  std::unique_ptr<Store> Make() {
    if constexpr (std::is_same_v<T, SqliteStore>) {
      return std::make_unique<SqliteStore>(":memory:");
    } else {
      return std::make_unique<MemoryStore>();
    }
  }
};

using StoreTypes = ::testing::Types<MemoryStore, SqliteStore>;
TYPED_TEST_SUITE(StoreContractTest, StoreTypes);

TYPED_TEST(StoreContractTest, PendingThenPublish) {
  auto store = this->Make();
  store->InsertPending(MakePending("a", kIndiana, {"x", "y"}), kDay);
  store->InsertPending(MakePending("b", kIndiana), kDay + std::chrono::days(3));
  auto pools = store->LoadPools();
  ASSERT_EQ(pools.size(), 1u);
  EXPECT_EQ(pools[0].opened_at, kDay);  // set by the first insert only
  ASSERT_EQ(pools[0].reports.size(), 2u);
  EXPECT_EQ(pools[0].reports[0].report_id, "a");
  EXPECT_EQ(pools[0].reports[0].selections, (std::vector<std::string>{"x", "y"}));

  ReleaseBatch batch{kIndiana, {}, kDay};
  batch.reports.push_back({"b", {"sa.activity.kissing"}, kIndiana, kDay});
  batch.reports.push_back({"a", {"x", "y"}, kIndiana, kDay});
  store->Publish(batch);
  EXPECT_TRUE(store->LoadPools().empty());
  ASSERT_EQ(store->PublicCount(), 2u);
  auto all = store->AllPublic();
  EXPECT_EQ(all[0].report_id, "a");  // ordered by (released_at, report_id)
  EXPECT_EQ(all[1].report_id, "b");
  EXPECT_EQ(all[0].designation, kIndiana);
}

TYPED_TEST(StoreContractTest, PublicPagination) {
  auto store = this->Make();
  ReleaseBatch batch{kIndiana, {}, kDay};
  for (int i = 0; i < 7; ++i) {
    std::string id = "r" + std::to_string(i);
    store->InsertPending(MakePending(id, kIndiana), kDay);
    batch.reports.push_back({id, {"t"}, kIndiana, kDay});
  }
  store->Publish(batch);
  EXPECT_EQ(store->PublicPage(0, 3).size(), 3u);
  EXPECT_EQ(store->PublicPage(6, 3).size(), 1u);
  EXPECT_TRUE(store->PublicPage(7, 3).empty());
  EXPECT_EQ(store->PublicPage(3, 3)[0].report_id, "r3");
}

TYPED_TEST(StoreContractTest, MoveRekeysAndDropsEmptyPool) {
  auto store = this->Make();
  store->InsertPending(MakePending("c", kBloomington), kDay);
  store->MovePending("c", kIndiana, kDay + std::chrono::days(2));
  auto pools = store->LoadPools();
  ASSERT_EQ(pools.size(), 1u);
  EXPECT_EQ(pools[0].designation, kIndiana);
  EXPECT_EQ(pools[0].reports[0].designation, kIndiana);
  EXPECT_EQ(pools[0].opened_at, kDay + std::chrono::days(2));
  EXPECT_THROW(store->MovePending("missing", kIndiana, kDay), Error);
}

TYPED_TEST(StoreContractTest, DumpHasNoPendingTime) {
  auto store = this->Make();
  store->InsertPending(MakePending("a", kIndiana), kDay);
  auto dump = store->DumpState();
  for (const auto& [k, v] : dump["pools"][0]["reports"][0].items()) {
    EXPECT_TRUE(k == "report_id" || k == "tags" || k == "designation") << k;
  }
}

TEST(SqliteStoreTest, PendingTableHasNoTimeColumn) {
  SqliteStore store(":memory:");
  auto cols = store.Columns("pending");
  EXPECT_EQ(cols, (std::vector<std::string>{"report_id", "tags", "country",
                                            "province", "city", "resolution",
                                            "pool_key"}));
  auto pub = store.Columns("public");
  EXPECT_NE(std::find(pub.begin(), pub.end(), "released_at"), pub.end());
}

TEST(SqliteStoreTest, PublicIsAppendOnly) {
  const std::string path = TempDb("append_only");
  {
    SqliteStore store(path);
    ReleaseBatch batch{kIndiana, {}, kDay};
    store.InsertPending(MakePending("a", kIndiana), kDay);
    batch.reports.push_back({"a", {"t"}, kIndiana, kDay});
    store.Publish(batch);
  }
  sqlite3* db = nullptr;
  ASSERT_EQ(sqlite3_open(path.c_str(), &db), SQLITE_OK);
  EXPECT_NE(sqlite3_exec(db, "DELETE FROM public", nullptr, nullptr, nullptr),
            SQLITE_OK);
  EXPECT_NE(sqlite3_exec(db, "UPDATE public SET released_at = 0", nullptr,
                         nullptr, nullptr),
            SQLITE_OK);
  sqlite3_close(db);
  SqliteStore reopened(path);
  EXPECT_EQ(reopened.PublicCount(), 1u);
  std::filesystem::remove(path);
}

TEST(SqliteStoreTest, DuplicatePublishRollsBack) {
  SqliteStore store(":memory:");
  ReleaseBatch batch{kIndiana, {}, kDay};
  store.InsertPending(MakePending("a", kIndiana), kDay);
  batch.reports.push_back({"a", {"t"}, kIndiana, kDay});
  store.Publish(batch);
  store.InsertPending(MakePending("b", kIndiana), kDay);
  ReleaseBatch again{kIndiana, {}, kDay};
  again.reports.push_back({"b", {"t"}, kIndiana, kDay});
  again.reports.push_back({"a", {"t"}, kIndiana, kDay});  // already public
  EXPECT_THROW(store.Publish(again), Error);
  // "b" is still pending: the whole transaction was undone.
  ASSERT_EQ(store.LoadPools().size(), 1u);
  EXPECT_EQ(store.PublicCount(), 1u);
}

TEST(SqliteStoreTest, EngineResumesAfterRestart) {
  const std::string path = TempDb("restart");
  {
    SqliteStore store(path);
    ReleaseEngine engine(ReleasePolicy::WithK(5), store, 1);
    for (int i = 0; i < 3; ++i) {
      engine.Enqueue(MakePending("r" + std::to_string(i), kIndiana), kDay);
    }
  }
  SqliteStore store(path);
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 2);
  EXPECT_EQ(engine.PendingCount(kIndiana), 3u);
  engine.Enqueue(MakePending("r3", kIndiana), kDay);
  auto batch = engine.Enqueue(MakePending("r4", kIndiana), kDay);
  ASSERT_TRUE(batch);
  EXPECT_EQ(batch->reports.size(), 5u);
  EXPECT_EQ(store.PublicCount(), 5u);
  EXPECT_TRUE(store.LoadPools().empty());
  std::filesystem::remove(path);
}

TEST(SqliteStoreTest, UnopenablePathIsUnavailable) {
  try {
    SqliteStore store("/nonexistent-dir/x/y.db");
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.retryable());
  }
}

}  // namespace
}  // namespace geopool::release
