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
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "../common/rank.h"
#include "flaky_store.h"
#include "geopool/error.h"

namespace geopool::release {
namespace {

using geo::GeoDesignation;
using std::chrono::hours;
using std::chrono::seconds;
using testing::FlakyStore;
using testing::MakePending;

const GeoDesignation kIndiana = GeoDesignation::Make("USA", "Indiana");
const GeoDesignation kBloomington =
    GeoDesignation::Make("USA", "Indiana", "Bloomington");
const GeoDesignation kUsa = GeoDesignation::Make("USA");

// 2015-03-10 14:23:05 UTC
const Timestamp kNow = Timestamp(seconds(1426000000 - 1426000000 % 86400 + 51785));
const Timestamp kDayStart = Timestamp(seconds(1426000000 - 1426000000 % 86400));

TEST(EngineTest, KOfOneReleasesImmediately) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(1), store, 1);
  auto batch = engine.Enqueue(MakePending("a", kIndiana), kNow);
  ASSERT_TRUE(batch);
  EXPECT_EQ(batch->reports.size(), 1u);
  EXPECT_EQ(store.PublicCount(), 1u);
  EXPECT_EQ(engine.PendingCount(kIndiana), 0u);
}

TEST(EngineTest, FifthReportReleasesBatchOfFive) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 1);
  for (int i = 0; i < 4; ++i) {
    EXPECT_FALSE(engine.Enqueue(MakePending("r" + std::to_string(i), kIndiana),
                                kNow + hours(i)));
  }
  EXPECT_EQ(store.PublicCount(), 0u);
  auto batch = engine.Enqueue(MakePending("r4", kIndiana), kNow + hours(5));
  ASSERT_TRUE(batch);
  ASSERT_EQ(batch->reports.size(), 5u);
  for (const auto& r : batch->reports) {
    EXPECT_EQ(r.released_at, batch->released_at);
  }
  // Released at the truncated release instant, not any arrival time.
  EXPECT_EQ(batch->released_at, kDayStart);
  EXPECT_EQ(batch->released_at.time_since_epoch().count() % 86400, 0);
  EXPECT_EQ(engine.PendingCount(kIndiana), 0u);
}

TEST(EngineTest, PendingCount) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 1);
  EXPECT_EQ(engine.PendingCount(kIndiana), 0u);
  for (int i = 0; i < 3; ++i) {
    engine.Enqueue(MakePending("r" + std::to_string(i), kIndiana), kNow);
  }
  EXPECT_EQ(engine.PendingCount(kIndiana), 3u);
  engine.Enqueue(MakePending("r3", kIndiana), kNow);
  engine.Enqueue(MakePending("r4", kIndiana), kNow);
  EXPECT_EQ(engine.PendingCount(kIndiana), 0u);
}

TEST(EngineTest, PoolsKeyOnExactDesignation) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(3), store, 1);
  engine.Enqueue(MakePending("c1", kBloomington), kNow);
  engine.Enqueue(MakePending("c2", kBloomington), kNow);
  engine.Enqueue(MakePending("p1", kIndiana), kNow);
  engine.Enqueue(MakePending("n1", kUsa), kNow);
  EXPECT_EQ(engine.PendingCount(kBloomington), 2u);
  EXPECT_EQ(engine.PendingCount(kIndiana), 1u);
  EXPECT_EQ(engine.PendingCount(kUsa), 1u);
  EXPECT_EQ(store.PublicCount(), 0u);
}

TEST(EngineTest, PerLevelK) {
  MemoryStore store;
  ReleasePolicy p;
  p.k_city = 2;
  p.k_country = 4;
  ReleaseEngine engine(p, store, 1);
  engine.Enqueue(MakePending("c1", kBloomington), kNow);
  EXPECT_TRUE(engine.Enqueue(MakePending("c2", kBloomington), kNow));
  for (int i = 0; i < 3; ++i) {
    EXPECT_FALSE(engine.Enqueue(MakePending("n" + std::to_string(i), kUsa), kNow));
  }
  EXPECT_TRUE(engine.Enqueue(MakePending("n3", kUsa), kNow));
}

TEST(EngineTest, InsertFailureLeavesNothingBehind) {
  FlakyStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 1);
  store.fail_inserts = 1;
  try {
    engine.Enqueue(MakePending("a", kIndiana), kNow);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(engine.PendingCount(kIndiana), 0u);
  EXPECT_TRUE(store.LoadPools().empty());
}

// Reference model: a plain list per designation, drained in full whenever
// it holds at least k reports and the publish succeeds.
struct SequentialReference {
  size_t k;
  std::map<std::string, std::vector<std::string>> pools;

  std::optional<std::vector<std::string>> Arrive(const std::string& key,
                                                 const std::string& id,
                                                 bool publish_ok) {
    auto& pool = pools[key];
    pool.push_back(id);
    if (pool.size() < k || !publish_ok) return std::nullopt;
    auto out = pool;
    pool.clear();
    return out;
  }
};

TEST(EngineTest, DelayedDrainReleasesWholePool) {
  // Publishes for arrivals 5 and 6 fail, so the 7th arrival drains all 7.
  FlakyStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 3);
  SequentialReference ref{5, {}};
  for (int i = 0; i < 7; ++i) {
    const bool fail = (i == 4 || i == 5);
    if (fail) store.fail_publishes = 1;
    std::string id = "r" + std::to_string(i);
    auto got = engine.Enqueue(MakePending(id, kIndiana), kNow);
    auto want = ref.Arrive(kIndiana.Key(), id, !fail);
    ASSERT_EQ(got.has_value(), want.has_value()) << "arrival " << i;
    if (got) {
      std::vector<std::string> ids;
      for (const auto& r : got->reports) ids.push_back(r.report_id);
      std::sort(ids.begin(), ids.end());
      std::sort(want->begin(), want->end());
      EXPECT_EQ(ids, *want);
      EXPECT_EQ(ids.size(), 7u);
    }
  }
  EXPECT_EQ(store.PublicCount(), 7u);
}

TEST(EngineTest, RandomLogsMatchSequentialReference) {
  std::mt19937_64 rng(99);
  const std::vector<GeoDesignation> places = {
      kUsa, kIndiana, kBloomington, GeoDesignation::Make("Italy"),
      GeoDesignation::Make("Canada", "Ontario")};
  for (int run = 0; run < 20; ++run) {
    size_t k = 1 + rng() % 8;
    FlakyStore store;
    ReleaseEngine engine(ReleasePolicy::WithK(static_cast<uint32_t>(k)), store, run);
    SequentialReference ref{k, {}};
    for (int i = 0; i < 300; ++i) {
      const auto& d = places[rng() % places.size()];
      bool fail = rng() % 10 == 0;
      if (fail) store.fail_publishes = 1;
      std::string id = std::to_string(run) + "-" + std::to_string(i);
      auto got = engine.Enqueue(MakePending(id, d), kNow);
      store.fail_publishes = 0;
      auto want = ref.Arrive(d.Key(), id, !fail);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) {
        ASSERT_EQ(got->reports.size(), want->size());
      }
    }
    for (const auto& d : places) {
      EXPECT_EQ(engine.PendingCount(d), ref.pools[d.Key()].size());
    }
  }
}

TEST(EscalationTest, StaleCityReportsCompleteProvinceBatch) {
  MemoryStore store;
  ReleasePolicy p = ReleasePolicy::WithK(5);
  p.escalation_after = 2;
  ReleaseEngine engine(p, store, 1);
  engine.Enqueue(MakePending("c1", kBloomington), kNow);
  engine.Enqueue(MakePending("c2", kBloomington), kNow);
  const auto later = kNow + std::chrono::days(2);
  for (int i = 0; i < 3; ++i) {
    engine.Enqueue(MakePending("p" + std::to_string(i), kIndiana), later);
  }
  // Not stale yet one day in.
  EXPECT_TRUE(engine.EscalateStale(kNow + std::chrono::days(1)).moves.empty());

  auto result = engine.EscalateStale(later);
  ASSERT_EQ(result.moves.size(), 2u);
  EXPECT_EQ(result.moves[0].from, kBloomington);
  EXPECT_EQ(result.moves[0].to, kIndiana);
  ASSERT_EQ(result.batches.size(), 1u);
  EXPECT_EQ(result.batches[0].reports.size(), 5u);
  EXPECT_EQ(result.batches[0].designation, kIndiana);
  for (const auto& r : result.batches[0].reports) {
    EXPECT_EQ(r.designation, kIndiana);  // escalated reports are coarsened
  }
  EXPECT_EQ(engine.PendingCount(kBloomington), 0u);
  EXPECT_EQ(engine.PendingCount(kIndiana), 0u);
  EXPECT_EQ(store.PublicCount(), 5u);
}

TEST(EscalationTest, DisabledIsNoOp) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 1);
  engine.Enqueue(MakePending("c1", kBloomington), kNow);
  auto result = engine.EscalateStale(kNow + std::chrono::days(400));
  EXPECT_TRUE(result.moves.empty());
  EXPECT_EQ(engine.PendingCount(kBloomington), 1u);
}

TEST(EscalationTest, CountryReportsStay) {
  MemoryStore store;
  ReleasePolicy p = ReleasePolicy::WithK(5);
  p.escalation_after = 1;
  ReleaseEngine engine(p, store, 1);
  engine.Enqueue(MakePending("n1", kUsa), kNow);
  engine.Enqueue(MakePending("n2", kUsa), kNow);
  auto result = engine.EscalateStale(kNow + std::chrono::days(30));
  EXPECT_TRUE(result.moves.empty());
  EXPECT_EQ(engine.PendingCount(kUsa), 2u);
}

TEST(EscalationTest, OneLevelPerPass) {
  MemoryStore store;
  ReleasePolicy p = ReleasePolicy::WithK(50);
  p.escalation_after = 1;
  ReleaseEngine engine(p, store, 1);
  engine.Enqueue(MakePending("c1", kBloomington), kNow);
  engine.Enqueue(MakePending("p1", kIndiana), kNow);
  auto t1 = kNow + std::chrono::days(1);
  auto r1 = engine.EscalateStale(t1);
  // c1 -> province; p1 (stale before the pass) -> country.
  EXPECT_EQ(r1.moves.size(), 2u);
  EXPECT_EQ(engine.PendingCount(kIndiana), 1u);
  EXPECT_EQ(engine.PendingCount(kUsa), 1u);
  // c1's new province pool opened at t1, so it needs another unit.
  EXPECT_TRUE(engine.EscalateStale(t1).moves.empty());
  auto r2 = engine.EscalateStale(t1 + std::chrono::days(1));
  EXPECT_EQ(r2.moves.size(), 1u);
  EXPECT_EQ(engine.PendingCount(kUsa), 2u);
}

TEST(EscalationTest, MoveFailureKeepsReportInPlace) {
  FlakyStore store;
  ReleasePolicy p = ReleasePolicy::WithK(5);
  p.escalation_after = 1;
  ReleaseEngine engine(p, store, 1);
  engine.Enqueue(MakePending("c1", kBloomington), kNow);
  engine.Enqueue(MakePending("c2", kBloomington), kNow);
  store.fail_moves = 1;
  auto r = engine.EscalateStale(kNow + std::chrono::days(1));
  EXPECT_TRUE(r.moves.empty());
  EXPECT_EQ(engine.PendingCount(kBloomington), 2u);
  r = engine.EscalateStale(kNow + std::chrono::days(1));
  EXPECT_EQ(r.moves.size(), 2u);
  EXPECT_EQ(engine.PendingCount(kIndiana), 2u);
}

// k-anonymity over random arrival streams.
TEST(EnginePropertyTest, EveryBatchMeetsK) {
  std::vector<GeoDesignation> places;
  for (const char* c : {"USA", "Italy", "Canada"}) {
    places.push_back(GeoDesignation::Make(c));
    for (const char* p : {"North", "South"}) {
      places.push_back(GeoDesignation::Make(c, p));
      places.push_back(GeoDesignation::Make(c, p, "Capital"));
    }
  }
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    uint32_t k = 1 + seed % 10;
    MemoryStore store;
    ReleaseEngine engine(ReleasePolicy::WithK(k), store, seed);
    size_t released = 0;
    std::set<std::string> batched;
    for (int i = 0; i < 1000; ++i) {
      auto now = kNow + seconds(i * 600);
      auto batch = engine.Enqueue(
          MakePending("id" + std::to_string(i), places[rng() % places.size()]),
          now);
      if (batch) {
        ASSERT_GE(batch->reports.size(), k);
        released += batch->reports.size();
        for (const auto& r : batch->reports) batched.insert(r.report_id);
      }
    }
    EXPECT_EQ(released + engine.TotalPending(), 1000u);
    for (const auto& r : store.AllPublic()) {
      EXPECT_TRUE(batched.contains(r.report_id));
    }
  }
}

TEST(EnginePropertyTest, BatchOrderCarriesNoArrivalOrder) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(10), store, 42);
  double sum_abs = 0;
  int batches = 0;
  for (int b = 0; b < 250; ++b) {
    std::optional<ReleaseBatch> batch;
    for (int i = 0; i < 10; ++i) {
      batch = engine.Enqueue(
          MakePending(std::to_string(b) + "-" + std::to_string(i), kIndiana), kNow);
    }
    ASSERT_TRUE(batch);
    std::vector<size_t> arrival_at_position;
    for (const auto& r : batch->reports) {
      arrival_at_position.push_back(
          std::stoul(r.report_id.substr(r.report_id.find('-') + 1)));
    }
    sum_abs += std::abs(geopool::testing::SpearmanOfPermutation(arrival_at_position));
    ++batches;
  }
  EXPECT_LT(sum_abs / batches, 0.35);  // |rho| of uniform shuffles, n=10
  // A strict bound over many batches lives in the acceptance suite.
}

TEST(EnginePropertyTest, StateHoldsNoPerReportTime) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(4), store, 1);
  for (int i = 0; i < 10; ++i) {
    engine.Enqueue(MakePending("r" + std::to_string(i), i % 2 ? kIndiana : kUsa),
                   kNow + seconds(i * 37));
  }
  auto check_pending = [](const nlohmann::json& pools) {
    for (const auto& pool : pools) {
      for (const auto& r : pool["reports"]) {
        std::set<std::string> keys;
        for (const auto& [k, v] : r.items()) keys.insert(k);
        EXPECT_EQ(keys, (std::set<std::string>{"report_id", "tags", "designation"}));
      }
    }
  };
  check_pending(engine.DumpState());
  auto persisted = store.DumpState();
  check_pending(persisted["pools"]);
  for (const auto& r : persisted["public"]) {
    EXPECT_EQ(r["released_at"].get<int64_t>() % 86400, 0);
  }
}

TEST(EngineConcurrencyTest, ConcurrentSubmittersSeeOnePool) {
  MemoryStore store;
  ReleaseEngine engine(ReleasePolicy::WithK(5), store, 7);
  std::atomic<size_t> released{0};
  std::atomic<bool> undersized{false};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 250; ++i) {
        const auto& d = (i % 3 == 0) ? kUsa : kIndiana;
        auto b = engine.Enqueue(
            MakePending(std::to_string(t) + "/" + std::to_string(i), d), kNow);
        if (b) {
          if (b->reports.size() != 5) undersized = true;
          released += b->reports.size();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_FALSE(undersized);
  EXPECT_EQ(released + engine.TotalPending(), 2000u);
  EXPECT_EQ(store.PublicCount(), released.load());
}

}  // namespace
}  // namespace geopool::release
