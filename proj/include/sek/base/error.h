// Copyright 2026  The sekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEK_BASE_ERROR_H_
#define SEK_BASE_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace sek {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible tensor extents. The message names the offending axes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class DTypeError : public Error {
 public:
  using Error::Error;
};

// Bad argument or configuration value; maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Numerical failure at runtime (e.g. non-finite loss).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

namespace internal {

template <typename... Args>
std::string StrCat(Args&&... args) {
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  return os.str();
}

}  // namespace internal

template <typename E = Error, typename... Args>
inline void Check(bool cond, Args&&... args) {
  if (!cond) throw E(internal::StrCat(std::forward<Args>(args)...));
}

}  // namespace sek

#endif  // SEK_BASE_ERROR_H_
