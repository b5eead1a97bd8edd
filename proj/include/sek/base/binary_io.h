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

#ifndef SEK_BASE_BINARY_IO_H_
#define SEK_BASE_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "sek/base/error.h"

// Little-endian scalar I/O for the binary file formats.
namespace sek::io {

template <typename V>
void WriteLE(std::ostream& out, V value) {
  static_assert(std::is_arithmetic_v<V>);
  using U = std::conditional_t<sizeof(V) == 1, uint8_t,
            std::conditional_t<sizeof(V) == 2, uint16_t,
            std::conditional_t<sizeof(V) == 4, uint32_t, uint64_t>>>;
  U bits;
  std::memcpy(&bits, &value, sizeof(V));
  char buf[sizeof(V)];
  for (size_t i = 0; i < sizeof(V); ++i) buf[i] = static_cast<char>(bits >> (8 * i));
  out.write(buf, sizeof(V));
}

template <typename V>
V ReadLE(std::istream& in, const std::string& what) {
  static_assert(std::is_arithmetic_v<V>);
  using U = std::conditional_t<sizeof(V) == 1, uint8_t,
            std::conditional_t<sizeof(V) == 2, uint16_t,
            std::conditional_t<sizeof(V) == 4, uint32_t, uint64_t>>>;
  unsigned char buf[sizeof(V)];
  in.read(reinterpret_cast<char*>(buf), sizeof(V));
  Check<IoError>(static_cast<bool>(in), what, ": unexpected end of file");
  U bits = 0;
  for (size_t i = 0; i < sizeof(V); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  V value;
  std::memcpy(&value, &bits, sizeof(V));
  return value;
}

// Reads four bytes and checks them against `magic`.
inline void ExpectMagic(std::istream& in, const char* magic, const std::string& what) {
  char buf[4] = {};
  in.read(buf, 4);
  Check<IoError>(in && std::memcmp(buf, magic, 4) == 0, what, ": missing '",
                 std::string(magic, 4), "' header");
}

}  // namespace sek::io

#endif  // SEK_BASE_BINARY_IO_H_
