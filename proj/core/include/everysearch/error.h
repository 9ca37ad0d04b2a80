// Copyright 2026 The EverySearch Authors.
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

#ifndef EVERYSEARCH_ERROR_H_
#define EVERYSEARCH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace everysearch {

// Every failure raised by the library carries one of these codes so callers
// (and tests) can branch on the kind of failure without parsing messages.
enum class ErrorCode {
  kInvalidArgument,
  kEmptyInput,
  kDegenerateVector,
  kBadMagic,
  kDimensionMismatch,
  kTruncated,
  kUnsupportedVersion,
  kCorrupt,
  kNotFound,
  kIo,
  kNumericDivergence,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace everysearch

#endif  // EVERYSEARCH_ERROR_H_
