// Copyright 2026 The EverySearch Authors.
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

#ifndef EVERYSEARCH_DETAIL_BINARY_IO_H_
#define EVERYSEARCH_DETAIL_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>

namespace everysearch::detail {

template <typename T>
void append_le(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T read_le(const char* p) {
  static_assert(std::is_unsigned_v<T>);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<std::uint8_t>(p[i])) << (8 * i);
  }
  return value;
}

template <typename T>
void write_le(char* p, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    p[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
}

/// Reads a whole file; throws Error(kIo) if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace everysearch::detail

#endif  // EVERYSEARCH_DETAIL_BINARY_IO_H_
