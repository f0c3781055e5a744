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

#ifndef ECRECER_BINARY_IO_H_
#define ECRECER_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "ecrecer/error.h"

// Little-endian fixed-width helpers shared by every versioned container.
// Containers start with an 8-byte magic followed by a uint32 version.
namespace ecrecer::binio {

template <typename T>
  requires std::is_arithmetic_v<T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
  requires std::is_arithmetic_v<T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw SerializationError("unexpected end of container");
  return v;
}

inline void put_string(std::ostream& out, std::string_view s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, uint32_t max_len = 1u << 30) {
  auto n = get<uint32_t>(in);
  if (n > max_len) throw SerializationError("string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw SerializationError("unexpected end of container");
  return s;
}

template <typename T>
  requires std::is_arithmetic_v<T>
void put_vector(std::ostream& out, const std::vector<T>& v) {
  put<uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
  requires std::is_arithmetic_v<T>
std::vector<T> get_vector(std::istream& in, uint64_t max_len = 1ull << 34) {
  auto n = get<uint64_t>(in);
  if (n > max_len) throw SerializationError("vector length out of range");
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw SerializationError("unexpected end of container");
  return v;
}

inline void put_header(std::ostream& out, std::string_view magic, uint32_t version) {
  out.write(magic.data(), 8);
  put<uint32_t>(out, version);
}

// Returns the stored version; throws if the magic differs or the version is
// newer than `max_version`.
inline uint32_t expect_header(std::istream& in, std::string_view magic,
                              uint32_t max_version) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic.data(), 8) != 0) {
    throw SerializationError("bad magic, expected " + std::string(magic.substr(0, 8)));
  }
  auto version = get<uint32_t>(in);
  if (version == 0 || version > max_version) {
    throw SerializationError("unsupported container version " + std::to_string(version));
  }
  return version;
}

}  // namespace ecrecer::binio

#endif  // ECRECER_BINARY_IO_H_
