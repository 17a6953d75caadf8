/*
 * Copyright 2026 The SISA++ Authors.
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

#ifndef SISA_ERRORS_H_
#define SISA_ERRORS_H_

#include <stdexcept>
#include <string>

namespace sisa {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates an operation's precondition.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A referenced id, file or checkpoint does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure, or a malformed file.
class IoError : public Error {
 public:
  using Error::Error;
};

// Stored state disagrees with what the caller expects (digest mismatch,
// truncated blob, generation mismatch).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Throws InvalidArgumentError(message) when `condition` is false.
void Require(bool condition, const std::string& message);

}  // namespace sisa

#endif  // SISA_ERRORS_H_
