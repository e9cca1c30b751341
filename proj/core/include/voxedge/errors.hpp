// Copyright 2026 The voxedge Authors. All Rights Reserved.
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
#include <stdexcept>
#include <string>

namespace voxedge {

/// Raised when a text or binary input cannot be parsed. Carries the 1-based
/// line number for line-oriented formats (0 when not applicable).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A NaN or infinite value surfaced in a loss, gradient or metric. The
/// offending term is named in what().
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& term, const std::string& detail)
      : std::runtime_error(term + ": " + detail), term_(term) {}

  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace voxedge
