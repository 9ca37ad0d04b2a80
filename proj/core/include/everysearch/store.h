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

#ifndef EVERYSEARCH_STORE_H_
#define EVERYSEARCH_STORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "everysearch/embedder.h"

namespace everysearch {

// Vector file layout (all integers little-endian):
//   0..3   magic "EMBS"
//   4..5   version (1)
//   6..7   dim
//   8      dtype (1 = binary16)
//   9..15  reserved, zero
//   16..23 record_count
//   24..   record_count records of dim binary16 values
//
// Slot map sidecar (`<vector file>.ids`), append-only:
//   0..3   magic "EMBL", 4..5 version (1), 6..7 reserved
//   entries: u32 payload_len | u32 fnv1a32(payload) | payload
//   payload: u8 op (1 = put, 2 = del) | [u64 slot, put only] | id bytes
// A torn tail entry is dropped on open; the log is then rewritten with one
// put per live id.
inline constexpr std::uint16_t kStoreVersion = 1;
inline constexpr std::uint8_t kStoreDtypeF16 = 1;
inline constexpr std::size_t kStoreHeaderSize = 24;

struct StoreHeader {
  std::uint16_t version = kStoreVersion;
  std::uint16_t dim = 0;
  std::uint8_t dtype = kStoreDtypeF16;
  std::uint64_t record_count = 0;
};

enum class Durability {
  kFlush,  // every write reaches the OS before put/remove returns
  kSync,   // additionally fdatasync()ed
};

/// One live record visited by Store::scan.
struct ScanRecord {
  std::string_view item_id;
  std::uint64_t slot;
  std::span<const float> values;
};

/// Fixed-record embedding file with random access and an id<->slot map.
///
/// Thread safety: any number of concurrent readers (get, scan, size) with a
/// single writer (put, remove, compact) serialized by the caller.
class Store {
 public:
  /// Opens `path` or creates it with `dim`. Throws kDimensionMismatch when an
  /// existing file has a different dim, kCorrupt on a damaged
  /// header, kUnsupportedVersion on a newer format.
  static Store open_or_create(const std::filesystem::path& path, std::uint16_t dim,
                              Durability durability = Durability::kFlush);

  /// Opens an existing store, taking dim from its header.
  static Store open(const std::filesystem::path& path,
                    Durability durability = Durability::kFlush);

  static std::filesystem::path sidecar_path(const std::filesystem::path& path);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  /// Writes one record and returns its slot: in place for an existing id,
  /// else the lowest free slot, else appended. Vectors are stored exactly
  /// as given (no normalization). Throws kDimensionMismatch or
  /// kInvalidArgument for non-finite values.
  std::uint64_t put(std::string_view item_id, std::span<const float> values);
  std::uint64_t put(std::string_view item_id, const Embedding& e) {
    return put(item_id, e.values());
  }

  /// Throws kNotFound for unknown ids.
  Embedding get(std::string_view item_id) const;
  std::vector<std::uint16_t> get_bits(std::string_view item_id) const;

  /// Tombstones the id's slot. Throws kNotFound for unknown ids.
  void remove(std::string_view item_id);

  bool contains(std::string_view item_id) const;
  std::optional<std::uint64_t> slot_of(std::string_view item_id) const;

  /// Visits every live record in slot order. Records that exist when the scan
  /// starts are visited unless removed or replaced by a concurrent writer
  /// before being read; records added later are not visited.
  void scan(const std::function<void(const ScanRecord&)>& visit) const;

  std::size_t size() const;  // live ids
  std::uint64_t record_count() const;
  std::vector<std::uint64_t> free_slots() const;
  std::vector<std::string> ids() const;  // slot order
  std::uint16_t dim() const noexcept;
  StoreHeader header() const;
  const std::filesystem::path& path() const noexcept;

  /// Rewrites the vector file without tombstones. Slots are renumbered in
  /// slot order. Must not run concurrently with readers.
  void compact();

 private:
  struct Impl;
  explicit Store(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace everysearch

#endif  // EVERYSEARCH_STORE_H_
