// Copyright 2026 The AdStrength Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADSTRENGTH_ERROR_H_
#define ADSTRENGTH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace adstrength {

enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kNotFound,
  kFailedPrecondition,
  kIo,
  kNetwork,
  kTimeout,
  kMalformedResponse,
  kOutOfRange,
  kDivergence,
  kUnavailable,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every library failure is raised as an Error carrying a machine-checkable
// kind; callers (CLI, HTTP layer) map kinds to exit codes and status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace adstrength

#endif  // ADSTRENGTH_ERROR_H_
