/*
 * Copyright 2026 The ECRECer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ECRECER_ERROR_H_
#define ECRECER_ERROR_H_

#include <stdexcept>
#include <string>

namespace ecrecer {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual input (EC numbers, dates, numeric fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

// EC numbers carrying preliminary "n" serials such as 1.1.1.n5.
class PreliminaryEcError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Structural problems in a file: missing columns, ragged rows, bad headers.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, long row = -1)
      : Error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what),
        row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

// A caller violated an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Corrupt or incompatible serialized container.
class SerializationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecrecer

#endif  // ECRECER_ERROR_H_
