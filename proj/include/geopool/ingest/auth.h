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

// Shared-key request authentication for mutating routes.
//
// A request carries
//   X-Auth-Timestamp  unix seconds, decimal
//   X-Auth-Nonce      at least 16 random bytes, hex
//   X-Auth-MAC        hex HMAC-SHA-256(key, timestamp "\n" nonce "\n" body)
// The key is app-wide, never per user.

#ifndef GEOPOOL_INGEST_AUTH_H_
#define GEOPOOL_INGEST_AUTH_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace geopool::ingest {

inline constexpr char kTimestampHeader[] = "X-Auth-Timestamp";
inline constexpr char kNonceHeader[] = "X-Auth-Nonce";
inline constexpr char kMacHeader[] = "X-Auth-MAC";

struct AuthConfig {
  std::string shared_key;
  std::chrono::seconds replay_window{300};
  size_t nonce_cache_capacity = 1 << 20;

  // Throws kInvalidArgument for an empty key, a non-positive window or a
  // zero capacity.
  void Validate() const;
};

// Lowercase hex HMAC-SHA-256 over timestamp "\n" nonce "\n" body.
std::string ComputeMac(std::string_view key, std::string_view timestamp,
                       std::string_view nonce, std::string_view body);

enum class AuthReject { kBadMac, kStale, kReplay };

// "BAD_MAC", "STALE" or "REPLAY".
std::string_view AuthRejectCode(AuthReject r);

struct AuthHeaders {
  std::string timestamp, nonce, mac;
};

// Client side: signs `body` at unix time `now` with `nonce` (hex).
AuthHeaders SignRequest(std::string_view key, int64_t now,
                        std::string_view nonce, std::string_view body);

// 32 random hex digits from the OS entropy source.
std::string RandomNonce();

// Checks, in order: the MAC (missing or malformed headers count as a bad
// MAC), the timestamp window, then nonce reuse. An accepted nonce is
// remembered until its timestamp leaves the window. Thread-safe.
class RequestVerifier {
 public:
  explicit RequestVerifier(AuthConfig config);

  std::optional<AuthReject> Verify(const std::optional<std::string>& timestamp,
                                   const std::optional<std::string>& nonce,
                                   const std::optional<std::string>& mac,
                                   std::string_view body, int64_t now);

  size_t cached_nonces() const;

 private:
  // Drops nonces whose window closed before `now`. Caller holds mu_.
  void Evict(int64_t now);

  AuthConfig config_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, int64_t> seen_;  // nonce -> expiry
  std::multimap<int64_t, std::string> expiry_;
};

}  // namespace geopool::ingest

#endif  // GEOPOOL_INGEST_AUTH_H_
