// Copyright 2026 The mcpredict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCPREDICT_ERROR_HPP_
#define MCPREDICT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcpredict {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trace or config text. `line()` is 1-based, 0 when not tied to a
// specific line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0,
             std::string content = {})
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) + ": " + what +
                              (content.empty() ? "" : " ['" + content + "']")),
        line_(line),
        content_(std::move(content)) {}

  std::size_t line() const { return line_; }
  const std::string& content() const { return content_; }

 private:
  std::size_t line_;
  std::string content_;
};

// Caller passed arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace mcpredict

#endif  // MCPREDICT_ERROR_HPP_
