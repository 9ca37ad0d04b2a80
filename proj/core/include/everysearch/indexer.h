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

#ifndef EVERYSEARCH_INDEXER_H_
#define EVERYSEARCH_INDEXER_H_

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "everysearch/catalog.h"
#include "everysearch/embedder.h"
#include "everysearch/item.h"
#include "everysearch/store.h"

namespace everysearch {

enum class TextMode { kNameOnly, kWithBody };

std::string_view to_string(TextMode mode) noexcept;

struct ExtractOptions {
  TextMode mode = TextMode::kNameOnly;
  std::size_t body_line_budget = 64;
};

/// Items of one file: always a File item (text = tokenized stem), plus
/// Class/Symbol items found by per-language declaration patterns and, for
/// files named `actions.tsv`, one Action per `action_id<TAB>Display Name`
/// line. With kWithBody a Symbol's text also holds up to
/// `body_line_budget` lines of its body. Content that is not valid UTF-8 (or
/// contains NUL) yields the File item only.
///
/// Recognized declarations (after optional modifiers such as pub, export,
/// async, private, override, suspend, static):
///   .py                    class X, def x
///   .rs                    struct/enum/trait X, fn x
///   .js .jsx .ts .tsx .mjs class/interface X, function x
///   .kt .kts               class/interface/object X, fun x
///   .go                    type X struct/interface, func x, func (r T) x
///   .java .cs .scala .swift .cpp .cc .h .hpp .c  class/struct/interface X
std::vector<IndexItem> extract_items(std::string_view relative_path, std::string_view content,
                                     const ExtractOptions& options = {});

struct IndexerConfig {
  ExtractOptions extract;
  /// fnmatch patterns tested against each path component and against the
  /// whole relative path. `.everysearchignore` in the root adds more.
  std::vector<std::string> ignore;
  bool skip_hidden = true;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::size_t batch_size = 256;
};

inline constexpr std::string_view kIgnoreFileName = ".everysearchignore";

struct IndexReport {
  std::size_t files = 0;
  std::size_t items = 0;     // live items after indexing
  std::size_t embedded = 0;  // embeddings computed in this run
  std::size_t removed = 0;
  double seconds = 0.0;
  double items_per_second = 0.0;
  /// Mean embed+store time per embedded item, in milliseconds.
  double ms_per_item = 0.0;
};

enum class ChangeKind { kAdded, kModified, kRemoved };

struct FileChange {
  ChangeKind kind = ChangeKind::kModified;
  std::string path;  // relative to the project root, '/'-separated
  std::string content;
};

struct DeltaReport {
  std::size_t added = 0;
  std::size_t updated = 0;
  std::size_t removed = 0;
  std::size_t embedded = 0;
};

/// Keeps a Store and Catalog in sync with a project tree. One model embeds
/// every item kind. Calls are serialized internally; concurrent searches on
/// the store and catalog are not blocked beyond single-record writes.
class Indexer {
 public:
  Indexer(Store& store, const ModelWeights& weights, Catalog& catalog,
          IndexerConfig config = {});

  /// Full walk of `root`: new or changed files (by content hash) are
  /// re-extracted, unchanged item texts are not re-embedded, vanished files
  /// are dropped. Throws kIo if `root` is not a readable directory; per-file
  /// read failures are logged to `on_warning` and skipped.
  IndexReport index_project(const std::filesystem::path& root);

  /// Applies one file event to the store and catalog.
  DeltaReport apply_change(const FileChange& change);

  bool is_ignored(std::string_view relative_path) const;

  const ModelWeights& weights() const noexcept { return weights_; }
  const IndexerConfig& config() const noexcept { return config_; }
  /// Total embeddings computed by this indexer.
  std::size_t embed_calls() const noexcept { return embed_calls_.load(); }

  std::function<void(const std::string&)> on_warning;

 private:
  void load_ignore_file(const std::filesystem::path& root);
  bool settings_match() const;
  void reset_for_settings();
  DeltaReport sync_file(const std::string& path, std::string_view content);
  DeltaReport drop_file(const std::string& path);
  std::size_t embed_and_store(std::vector<IndexItem>& items);

  Store& store_;
  const ModelWeights& weights_;
  Catalog& catalog_;
  IndexerConfig config_;
  std::vector<std::string> extra_ignore_;
  std::uint64_t weights_fingerprint_;
  std::atomic<std::size_t> embed_calls_{0};
  std::mutex mutex_;
};

}  // namespace everysearch

#endif  // EVERYSEARCH_INDEXER_H_
