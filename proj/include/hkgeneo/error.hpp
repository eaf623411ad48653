// Copyright 2026 The hkgeneo Authors
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

#ifndef HKGENEO_ERROR_HPP
#define HKGENEO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hkgeneo {

/// Error categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  kInternal = 1,
  kConfig = 2,
  kSingular = 3,
  kEigensolve = 4,
  kNoConvergence = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hkgeneo

#endif  // HKGENEO_ERROR_HPP
