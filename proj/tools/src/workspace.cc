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

#include "everysearch/app/workspace.h"

#include <cstdlib>
#include <system_error>

#include "everysearch/error.h"

namespace everysearch::app {

std::filesystem::path resolve_home(const std::optional<std::filesystem::path>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kHomeEnvVar); env != nullptr && *env != '\0') {
    return env;
  }
  return std::filesystem::path(".everysearch");
}

Workspace::Workspace(std::filesystem::path home,
                     const std::optional<std::filesystem::path>& weights_path)
    : home_(std::move(home)) {
  std::error_code ec;
  if (weights_path) {
    weights_source_ = *weights_path;
  } else if (std::filesystem::is_regular_file(default_weights_path(), ec)) {
    weights_source_ = default_weights_path();
  }
  weights_ = weights_source_.empty() ? make_default_weights() : load_weights(weights_source_);
}

bool Workspace::store_exists() const {
  std::error_code ec;
  return std::filesystem::is_regular_file(store_path(), ec);
}

Store* Workspace::open_store(Durability durability) {
  if (store_) return store_.get();
  if (!store_exists()) return nullptr;
  store_ = std::make_unique<Store>(Store::open(store_path(), durability));
  if (store_->dim() != weights_.dims.embedding_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "store dim " + std::to_string(store_->dim()) + " does not match model dim " +
                    std::to_string(weights_.dims.embedding_dim));
  }
  load_catalog();
  return store_.get();
}

Store& Workspace::create_store(Durability durability) {
  if (store_) return *store_;
  std::error_code ec;
  std::filesystem::create_directories(home_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + home_.string() + ": " + ec.message());
  store_ = std::make_unique<Store>(
      Store::open_or_create(store_path(), weights_.dims.embedding_dim, durability));
  load_catalog();
  return *store_;
}

void Workspace::load_catalog() {
  std::error_code ec;
  if (std::filesystem::is_regular_file(catalog_path(), ec)) {
    catalog_ = Catalog::load(catalog_path());
  }
}

void Workspace::save_catalog() const { catalog_.save(catalog_path()); }

SearchResponse run_query(Workspace& workspace, std::string_view query,
                         const SearchOptions& options, const HitCallback& on_hit) {
  Store* store = workspace.open_store();
  if (store == nullptr) {
    if (options.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    options.schedule.validate();
    return {};
  }
  SearchEngine engine(*store, workspace.weights(), workspace.catalog());
  return engine.search(query, options, on_hit);
}

}  // namespace everysearch::app
