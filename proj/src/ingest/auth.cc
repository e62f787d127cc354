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

#include "geopool/ingest/auth.h"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <charconv>
#include <random>

#include "geopool/error.h"

namespace geopool::ingest {

namespace {

constexpr size_t kMinNonceHex = 32;
constexpr size_t kMaxNonceHex = 256;
constexpr size_t kMacHex = 64;

std::string Hex(const unsigned char* p, size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(2 * n, '0');
  for (size_t i = 0; i < n; ++i) {
    out[2 * i] = kHex[p[i] >> 4];
    out[2 * i + 1] = kHex[p[i] & 0xf];
  }
  return out;
}

bool IsLowerHex(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

std::optional<int64_t> ParseUnixSeconds(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  int64_t v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

void AuthConfig::Validate() const {
  if (shared_key.empty()) throw InvalidArgumentError("auth key is empty");
  if (replay_window.count() <= 0) {
    throw InvalidArgumentError("replay window must be positive");
  }
  if (nonce_cache_capacity == 0) {
    throw InvalidArgumentError("nonce cache capacity must be positive");
  }
}

std::string ComputeMac(std::string_view key, std::string_view timestamp,
                       std::string_view nonce, std::string_view body) {
  std::string msg;
  msg.reserve(timestamp.size() + nonce.size() + body.size() + 2);
  msg.append(timestamp).append("\n").append(nonce).append("\n").append(body);
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
           reinterpret_cast<const unsigned char*>(msg.data()), msg.size(), out,
           &len) == nullptr) {
    throw InternalError("HMAC computation failed");
  }
  return Hex(out, len);
}

std::string_view AuthRejectCode(AuthReject r) {
  switch (r) {
    case AuthReject::kBadMac:
      return "BAD_MAC";
    case AuthReject::kStale:
      return "STALE";
    case AuthReject::kReplay:
      return "REPLAY";
  }
  return "BAD_MAC";
}

AuthHeaders SignRequest(std::string_view key, int64_t now,
                        std::string_view nonce, std::string_view body) {
  AuthHeaders h{std::to_string(now), std::string(nonce), {}};
  h.mac = ComputeMac(key, h.timestamp, h.nonce, body);
  return h;
}

std::string RandomNonce() {
  std::random_device rd;
  unsigned char bytes[16];
  for (auto& b : bytes) b = static_cast<unsigned char>(rd());
  return Hex(bytes, sizeof(bytes));
}

RequestVerifier::RequestVerifier(AuthConfig config)
    : config_(std::move(config)) {
  config_.Validate();
}

std::optional<AuthReject> RequestVerifier::Verify(
    const std::optional<std::string>& timestamp,
    const std::optional<std::string>& nonce,
    const std::optional<std::string>& mac, std::string_view body,
    int64_t now) {
  if (!timestamp || !nonce || !mac) return AuthReject::kBadMac;
  if (nonce->size() < kMinNonceHex || nonce->size() > kMaxNonceHex ||
      !IsLowerHex(*nonce)) {
    return AuthReject::kBadMac;
  }
  if (mac->size() != kMacHex) return AuthReject::kBadMac;
  const std::string want =
      ComputeMac(config_.shared_key, *timestamp, *nonce, body);
  if (CRYPTO_memcmp(want.data(), mac->data(), kMacHex) != 0) {
    return AuthReject::kBadMac;
  }

  const auto ts = ParseUnixSeconds(*timestamp);
  const int64_t window = config_.replay_window.count();
  if (!ts || *ts < now - window || *ts > now + window) {
    return AuthReject::kStale;
  }

  std::lock_guard lock(mu_);
  Evict(now);
  if (seen_.contains(*nonce)) return AuthReject::kReplay;
  // A full cache cannot prove freshness, so it refuses rather than forgets.
  if (seen_.size() >= config_.nonce_cache_capacity) return AuthReject::kReplay;
  const int64_t expiry = *ts + window;
  seen_.emplace(*nonce, expiry);
  expiry_.emplace(expiry, *nonce);
  return std::nullopt;
}

void RequestVerifier::Evict(int64_t now) {
  auto end = expiry_.lower_bound(now);
  for (auto it = expiry_.begin(); it != end; ++it) seen_.erase(it->second);
  expiry_.erase(expiry_.begin(), end);
}

size_t RequestVerifier::cached_nonces() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

}  // namespace geopool::ingest
