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

#ifndef GEOPOOL_ERROR_H_
#define GEOPOOL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace geopool {

// Coarse error classes. kUnavailable is the only retryable one.
enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kNotFound,
  kFailedPrecondition,
  kUnavailable,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  bool retryable() const { return code_ == ErrorCode::kUnavailable; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgumentError(const std::string& m) {
  return Error(ErrorCode::kInvalidArgument, m);
}
inline Error ParseError(const std::string& m) {
  return Error(ErrorCode::kParse, m);
}
inline Error NotFoundError(const std::string& m) {
  return Error(ErrorCode::kNotFound, m);
}
inline Error FailedPreconditionError(const std::string& m) {
  return Error(ErrorCode::kFailedPrecondition, m);
}
inline Error UnavailableError(const std::string& m) {
  return Error(ErrorCode::kUnavailable, m);
}
inline Error InternalError(const std::string& m) {
  return Error(ErrorCode::kInternal, m);
}

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "INVALID_ARGUMENT";
    case ErrorCode::kParse:
      return "PARSE";
    case ErrorCode::kNotFound:
      return "NOT_FOUND";
    case ErrorCode::kFailedPrecondition:
      return "FAILED_PRECONDITION";
    case ErrorCode::kUnavailable:
      return "UNAVAILABLE";
    case ErrorCode::kInternal:
      return "INTERNAL";
  }
  return "UNKNOWN";
}

}  // namespace geopool

#endif  // GEOPOOL_ERROR_H_
