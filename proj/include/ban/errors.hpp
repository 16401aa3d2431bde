// Copyright 2026 The ban-seg Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace ban {

/// Failure categories. The CLI maps each category to a distinct exit code.
enum class ErrorKind {
  kDimension,
  kNumeric,
  kLabel,
  kInput,
  kBounds,
  kParse,
  kConfig,
  kVersion,
  kSpec,
  kContract,
  kIo,
  kTolerance,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kLabel: return "label";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kBounds: return "bounds";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kSpec: return "spec";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kTolerance: return "tolerance";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ban
