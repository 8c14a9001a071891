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

#include "core/error.h"

#include <iostream>
#include <utility>

namespace attnfilter {
namespace {

WarningHandler& Handler() {
  static WarningHandler handler = [](std::string_view message) {
    std::cerr << "attnfilter: warning: " << message << '\n';
  };
  return handler;
}

}  // namespace

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat:
      return "FormatError";
    case ErrorCode::kDtype:
      return "DtypeError";
    case ErrorCode::kMissingComponent:
      return "MissingComponent";
    case ErrorCode::kBundleInvalid:
      return "BundleInvalid";
    case ErrorCode::kIo:
      return "IoError";
    case ErrorCode::kAlreadyExists:
      return "AlreadyExists";
    case ErrorCode::kNumeric:
      return "NumericError";
    case ErrorCode::kShape:
      return "ShapeError";
    case ErrorCode::kGradientMissing:
      return "GradientMissing";
    case ErrorCode::kGeometry:
      return "GeometryError";
    case ErrorCode::kDegenerateInput:
      return "DegenerateInput";
    case ErrorCode::kOracle:
      return "OracleError";
    case ErrorCode::kProtocol:
      return "ProtocolError";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
  }
  return "UnknownError";
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

void SetWarningHandler(WarningHandler handler) {
  Handler() = std::move(handler);
}

void Warn(std::string_view message) {
  if (Handler()) Handler()(message);
}

}  // namespace attnfilter
