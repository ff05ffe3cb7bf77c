// Copyright 2026 The mmhash Authors.
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

#ifndef MMHASH_ERRORS_H_
#define MMHASH_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmhash {

// Bad caller input: out-of-range index, unsupported code length, bad flag.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Tensor or code shapes that do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FormatErrc {
  kIo,
  kBadMagic,
  kVersionMismatch,
  kTruncatedPayload,
  kNonFiniteValue,
  kInconsistentShape,
  kInvariantViolation,
};

std::string_view FormatErrcName(FormatErrc code);

// Anything wrong with a file on disk or with a data set's invariants.
class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrc code, const std::string& what)
      : std::runtime_error(std::string(FormatErrcName(code)) + ": " + what),
        code_(code) {}

  FormatErrc code() const noexcept { return code_; }

 private:
  FormatErrc code_;
};

// Retrieval evaluation that has nothing to score.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf produced during training or encoding.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string_view FormatErrcName(FormatErrc code) {
  switch (code) {
    case FormatErrc::kIo:
      return "io-error";
    case FormatErrc::kBadMagic:
      return "bad-magic";
    case FormatErrc::kVersionMismatch:
      return "version-mismatch";
    case FormatErrc::kTruncatedPayload:
      return "truncated-payload";
    case FormatErrc::kNonFiniteValue:
      return "non-finite-value";
    case FormatErrc::kInconsistentShape:
      return "inconsistent-shape";
    case FormatErrc::kInvariantViolation:
      return "invariant-violation";
  }
  return "unknown";
}

}  // namespace mmhash

#endif  // MMHASH_ERRORS_H_
