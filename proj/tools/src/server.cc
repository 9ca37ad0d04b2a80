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

#include "everysearch/app/server.h"

#include <algorithm>
#include <charconv>

#include "everysearch/app/wire.h"
#include "everysearch/error.h"
#include "httplib.h"
#include "json.hpp"

namespace everysearch::app {

struct SearchServer::Http {
  httplib::Server server;
};

namespace {

constexpr char kJsonType[] = "application/json";

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump(), kJsonType);
}

std::optional<std::size_t> parse_k(const std::string& text, std::size_t max_k) {
  std::size_t k = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, k);
  if (ec != std::errc() || ptr != end || k == 0 || k > max_k) return std::nullopt;
  return k;
}

}  // namespace

SearchServer::SearchServer(Workspace& workspace, ServerConfig config)
    : workspace_(workspace), config_(std::move(config)), http_(std::make_unique<Http>()) {
  if (config_.port < 0 || config_.port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "port out of range");
  }
  config_.search.schedule.validate();
  if (config_.index_root) {
    Store& store = workspace_.create_store();
    indexer_ = std::make_unique<Indexer>(store, workspace_.weights(), workspace_.catalog(),
                                         config_.indexer);
  } else {
    workspace_.open_store();
  }
  store_.store(workspace_.store());
  const std::size_t threads = std::max<std::size_t>(config_.worker_threads, 2);
  http_->server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  install_routes();
}

SearchServer::~SearchServer() { stop(); }

void SearchServer::install_routes() {
  http_->server.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
    const Store* store = store_.load();
    nlohmann::ordered_json j;
    j["item_count"] = store != nullptr ? store->size() : 0;
    j["dim"] = store != nullptr ? store->dim() : workspace_.weights().dims.embedding_dim;
    j["indexing"] = indexing_.load();
    res.set_content(j.dump(), kJsonType);
  });

  http_->server.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("q")) return send_error(res, 400, "missing query parameter q");
    SearchOptions options = config_.search;
    if (req.has_param("k")) {
      auto k = parse_k(req.get_param_value("k"), config_.max_k);
      if (!k) return send_error(res, 400, "k must be an integer in [1, max_k]");
      options.k = *k;
      options.standard_limit = *k;
    }
    const Store* store = store_.load();
    if (store == nullptr) return send_error(res, 503, "no index available");

    std::string query = req.get_param_value("q");
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, store, query = std::move(query), options](std::size_t, httplib::DataSink& sink) {
          bool open = true;
          auto send = [&](const std::string& chunk) {
            if (open && !sink.write(chunk.data(), chunk.size())) open = false;
          };
          SearchEngine engine(*store, workspace_.weights(), workspace_.catalog());
          SearchResponse response = engine.search(query, options, [&](const SearchHit& hit) {
            send(sse_event("hit", hit_json(hit)));
          });
          send(sse_event("done", done_json(query, response)));
          sink.done();
          return true;
        });
  });
}

int SearchServer::bind() {
  if (port_ >= 0) return port_;
  if (config_.port == 0) {
    port_ = http_->server.bind_to_any_port(config_.host);
  } else if (http_->server.bind_to_port(config_.host, config_.port)) {
    port_ = config_.port;
  }
  if (port_ <= 0) {
    port_ = -1;
    throw Error(ErrorCode::kIo, "cannot bind " + config_.host + ":" +
                                    std::to_string(config_.port));
  }
  return port_;
}

void SearchServer::start() {
  bind();
  serve_thread_ = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  if (config_.index_root) start_indexing(*config_.index_root);
}

void SearchServer::run() {
  bind();
  if (config_.index_root) start_indexing(*config_.index_root);
  http_->server.listen_after_bind();
}

void SearchServer::stop() {
  http_->server.stop();
  if (serve_thread_.joinable()) serve_thread_.join();
  wait_for_indexing();
}

bool SearchServer::start_indexing(const std::filesystem::path& root) {
  if (!indexer_) {
    Store& store = workspace_.create_store();
    indexer_ = std::make_unique<Indexer>(store, workspace_.weights(), workspace_.catalog(),
                                         config_.indexer);
    store_.store(&store);
  }
  bool expected = false;
  if (!indexing_.compare_exchange_strong(expected, true)) return false;
  if (index_thread_.joinable()) index_thread_.join();
  index_thread_ = std::thread([this, root] {
    try {
      indexer_->index_project(root);
      workspace_.save_catalog();
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex_);
      index_error_ = e.what();
    }
    indexing_.store(false);
  });
  return true;
}

void SearchServer::wait_for_indexing() {
  if (index_thread_.joinable()) index_thread_.join();
}

std::string SearchServer::last_index_error() const {
  std::lock_guard lock(mutex_);
  return index_error_;
}

}  // namespace everysearch::app
