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

#ifndef EVERYSEARCH_APP_SERVER_H_
#define EVERYSEARCH_APP_SERVER_H_

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "everysearch/app/workspace.h"
#include "everysearch/engine.h"
#include "everysearch/indexer.h"

namespace everysearch::app {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  SearchOptions search;
  std::size_t max_k = 1000;
  std::size_t worker_threads = 32;
  IndexerConfig indexer;
  /// Indexed in the background after the server starts listening.
  std::optional<std::filesystem::path> index_root;
};

/// HTTP surface over a workspace:
///   GET /search?q=<text>[&k=<n>]  text/event-stream of `hit` events then one
///                                 `done`; 400 on missing q or bad k, 503
///                                 without a store.
///   GET /status                   {"item_count": n, "dim": d, "indexing": b}
/// Searches read the store concurrently with the background indexer.
class SearchServer {
 public:
  SearchServer(Workspace& workspace, ServerConfig config);
  ~SearchServer();

  SearchServer(const SearchServer&) = delete;
  SearchServer& operator=(const SearchServer&) = delete;

  /// Binds the listening socket and returns the port. Throws kIo on failure.
  int bind();
  /// Serves on a background thread (binding first if needed) and starts
  /// indexing when configured.
  void start();
  /// Blocks serving on the calling thread.
  void run();
  void stop();

  /// Starts a background index of `root`; returns false if one is running.
  /// Call from the thread that owns the server.
  bool start_indexing(const std::filesystem::path& root);
  void wait_for_indexing();
  bool indexing() const noexcept { return indexing_.load(); }
  /// Message of the last failed background index, if any.
  std::string last_index_error() const;

  int port() const noexcept { return port_; }

 private:
  struct Http;
  void install_routes();

  Workspace& workspace_;
  ServerConfig config_;
  std::unique_ptr<Http> http_;
  std::unique_ptr<Indexer> indexer_;
  std::atomic<Store*> store_{nullptr};
  int port_ = -1;
  std::thread serve_thread_;
  std::thread index_thread_;
  std::atomic<bool> indexing_{false};
  mutable std::mutex mutex_;
  std::string index_error_;
};

}  // namespace everysearch::app

#endif  // EVERYSEARCH_APP_SERVER_H_
