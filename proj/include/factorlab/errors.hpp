// Copyright 2026 The Factorlab Authors.
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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace factorlab {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  OutOfRange,
  InsufficientIndices,
  BudgetExhausted,
  NotEnoughSets,
  DimensionTooSmall,
  RetentionImpossible,
  DefectTooLarge,
  Unsupported,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. The optional context fields are
/// filled in by the block construction so that a run report can say
/// exactly which step (and which row, in the two-parameter case) gave up.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  std::optional<std::size_t> step;
  std::optional<std::size_t> row;
  std::optional<std::size_t> suggested_dim;

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool cond, ErrorKind kind, const std::string& message) {
  if (!cond) fail(kind, message);
}

}  // namespace factorlab
