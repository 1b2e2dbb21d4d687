/* Copyright 2026 The CIMLeak Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CIMLEAK_DETAIL_LITTLE_ENDIAN_HPP_
#define CIMLEAK_DETAIL_LITTLE_ENDIAN_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

namespace cimleak::detail {

template <typename T>
std::array<char, sizeof(T)> to_le_bytes(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  return bytes;
}

template <typename T>
T from_le_bytes(const char* bytes) {
  std::array<char, sizeof(T)> tmp;
  std::memcpy(tmp.data(), bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(tmp[i], tmp[sizeof(T) - 1 - i]);
  T value;
  std::memcpy(&value, tmp.data(), sizeof(T));
  return value;
}

template <typename T>
void write_le(std::ostream& os, T value) {
  const auto bytes = to_le_bytes(value);
  os.write(bytes.data(), bytes.size());
}

// False on short read.
template <typename T>
bool read_le(std::istream& is, T& value) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), bytes.size())) return false;
  value = from_le_bytes<T>(bytes.data());
  return true;
}

}  // namespace cimleak::detail

#endif  // CIMLEAK_DETAIL_LITTLE_ENDIAN_HPP_
