// Copyright 2026 The ALVC Workbench Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alvc {

/// Base of every error raised by the workbench.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Data violates a structural invariant (duplicate ids, unsorted frames, ...).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied sizes do not add up.
class SizeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Candidate-set construction could not reach its target size.
class ConstructionError : public Error {
 public:
  ConstructionError(std::size_t deficit, const std::string& what)
      : Error(what), deficit_(deficit) {}
  std::size_t deficit() const { return deficit_; }

 private:
  std::size_t deficit_;
};

/// Undefined or non-finite candidate score.
class ScoringError : public Error {
 public:
  using Error::Error;
};

/// Tensor input exceeds configured model limits.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or parameter.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace alvc
