/*
 * Copyright 2026 The attnfilter Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ATTNFILTER_CORE_ERROR_H_
#define ATTNFILTER_CORE_ERROR_H_

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace attnfilter {

// Failure categories surfaced by the library. The numeric values are part of
// the C ABI (see include/attnfilter/attnfilter.h) and must not be reordered.
enum class ErrorCode : int {
  kFormat = 1,
  kDtype = 2,
  kMissingComponent = 3,
  kBundleInvalid = 4,
  kIo = 5,
  kAlreadyExists = 6,
  kNumeric = 7,
  kShape = 8,
  kGradientMissing = 9,
  kGeometry = 10,
  kDegenerateInput = 11,
  kOracle = 12,
  kProtocol = 13,
  kInvalidArgument = 14,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

// Non-fatal diagnostics (dtype narrowing, skipped samples). The default
// handler prints to stderr. Install once at startup; not synchronized.
using WarningHandler = std::function<void(std::string_view)>;
void SetWarningHandler(WarningHandler handler);
void Warn(std::string_view message);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_ERROR_H_
