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

#ifndef EVERYSEARCH_CATALOG_H_
#define EVERYSEARCH_CATALOG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "everysearch/item.h"

namespace everysearch {

/// Per-file change-detection state.
struct FileRecord {
  std::uint64_t content_hash = 0;
  std::vector<std::string> item_ids;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

/// How the items were produced; a mismatch forces re-extraction.
struct CatalogSettings {
  std::string root;
  std::string text_mode = "name-only";
  std::size_t body_lines = 0;
  std::uint64_t weights_fingerprint = 0;

  friend bool operator==(const CatalogSettings&, const CatalogSettings&) = default;
};

/// Item metadata (names, kinds, origins) and file hashes for one project.
/// Items keep insertion order. Internally synchronized: readers may run while
/// the indexer mutates.
class Catalog {
 public:
  Catalog();
  Catalog(Catalog&&) noexcept;
  Catalog& operator=(Catalog&&) noexcept;
  ~Catalog();

  /// Inserts or replaces; a replaced item keeps its position.
  void upsert(IndexItem item);
  bool erase(std::string_view id);
  std::optional<IndexItem> find(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::size_t size() const;

  std::vector<IndexItem> items() const;
  /// Visits items in insertion order under a shared lock.
  void for_each(const std::function<void(const IndexItem&)>& visit) const;

  void set_file(const std::string& path, FileRecord record);
  std::optional<FileRecord> file(std::string_view path) const;
  bool erase_file(std::string_view path);
  std::vector<std::string> file_paths() const;

  CatalogSettings settings() const;
  void set_settings(CatalogSettings settings);

  void clear();

  /// JSON document written to a temporary file and renamed into place.
  void save(const std::filesystem::path& path) const;
  /// Throws kCorrupt on malformed documents, kIo when unreadable.
  static Catalog load(const std::filesystem::path& path);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace everysearch

#endif  // EVERYSEARCH_CATALOG_H_
