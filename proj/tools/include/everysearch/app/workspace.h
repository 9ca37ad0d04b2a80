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

#ifndef EVERYSEARCH_APP_WORKSPACE_H_
#define EVERYSEARCH_APP_WORKSPACE_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "everysearch/catalog.h"
#include "everysearch/embedder.h"
#include "everysearch/engine.h"
#include "everysearch/store.h"

namespace everysearch::app {

inline constexpr char kHomeEnvVar[] = "EVERYSEARCH_HOME";
inline constexpr char kStoreFileName[] = "vectors.embs";
inline constexpr char kCatalogFileName[] = "catalog.json";
inline constexpr char kWeightsFileName[] = "weights.embw";

/// `flag` if set, else $EVERYSEARCH_HOME, else ./.everysearch.
std::filesystem::path resolve_home(const std::optional<std::filesystem::path>& flag);

/// On-disk state of one project: vector store, catalog and model weights,
/// all under a home directory.
///
/// Weights come from the explicit path if given, else <home>/weights.embw if
/// present, else the seeded default model.
class Workspace {
 public:
  Workspace(std::filesystem::path home,
            const std::optional<std::filesystem::path>& weights_path = std::nullopt);

  const std::filesystem::path& home() const noexcept { return home_; }
  std::filesystem::path store_path() const { return home_ / kStoreFileName; }
  std::filesystem::path catalog_path() const { return home_ / kCatalogFileName; }
  std::filesystem::path default_weights_path() const { return home_ / kWeightsFileName; }

  const ModelWeights& weights() const noexcept { return weights_; }
  /// Where the weights were loaded from; empty for the default model.
  const std::filesystem::path& weights_source() const noexcept { return weights_source_; }

  bool store_exists() const;

  /// Opens the existing store (and its catalog). Returns nullptr when no
  /// store file exists yet.
  Store* open_store(Durability durability = Durability::kFlush);
  /// Opens or creates the store under home, creating the directory.
  Store& create_store(Durability durability = Durability::kFlush);

  Store* store() noexcept { return store_.get(); }
  Catalog& catalog() noexcept { return catalog_; }
  const Catalog& catalog() const noexcept { return catalog_; }
  void save_catalog() const;

 private:
  void load_catalog();

  std::filesystem::path home_;
  std::filesystem::path weights_source_;
  ModelWeights weights_;
  std::unique_ptr<Store> store_;
  Catalog catalog_;
};

/// Runs one combined search against the workspace. Without a store the
/// response is empty.
SearchResponse run_query(Workspace& workspace, std::string_view query,
                         const SearchOptions& options, const HitCallback& on_hit = {});

}  // namespace everysearch::app

#endif  // EVERYSEARCH_APP_WORKSPACE_H_
