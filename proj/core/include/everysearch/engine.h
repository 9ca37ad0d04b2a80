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

#ifndef EVERYSEARCH_ENGINE_H_
#define EVERYSEARCH_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "everysearch/catalog.h"
#include "everysearch/embedder.h"
#include "everysearch/item.h"
#include "everysearch/store.h"

namespace everysearch {

enum class HitSource { kStandard, kSemantic };

std::string_view to_string(HitSource source) noexcept;

/// Score given to standard (substring) hits; sorts above any cosine.
inline constexpr float kStandardHitScore = 2.0f;
inline constexpr float kMaxThreshold = 0.99f;

struct SearchHit {
  std::string item_id;
  float score = 0.0f;
  HitSource source = HitSource::kSemantic;
  ItemKind kind = ItemKind::kFile;
  std::string name;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Ranking order: score descending, then item_id ascending.
bool ranks_before(const SearchHit& a, const SearchHit& b) noexcept;

/// Threshold that rises with the number of hits already found:
/// base + step * floor(found / step_every), capped at 0.99.
struct ThresholdSchedule {
  float base = 0.30f;
  float step = 0.05f;
  std::uint32_t step_every = 5;

  static ThresholdSchedule fixed(float threshold) { return {threshold, 0.0f, 1}; }
  /// Throws kInvalidArgument on negative step or zero step_every.
  void validate() const;
};

float effective_threshold(const ThresholdSchedule& schedule, std::size_t found_count);

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws kDimensionMismatch on
/// unequal sizes and kDegenerateVector if either vector is zero.
float cosine_similarity(std::span<const float> a, std::span<const float> b);

/// A semantic hit as streamed, with the threshold that admitted it.
struct EmittedHit {
  SearchHit hit;
  float threshold = 0.0f;
};

enum class SearchStatus { kOk, kDegenerateQuery };

struct SemanticSearchResult {
  SearchStatus status = SearchStatus::kOk;
  std::string warning;
  std::vector<EmittedHit> emitted;  // in emission order
  std::vector<SearchHit> ranking;   // top-k of the emitted hits
};

using HitCallback = std::function<void(const SearchHit&)>;

/// Brute-force scan of `store` against an already computed query vector.
/// A record is emitted as soon as its cosine reaches the threshold in force,
/// which is recomputed from the number of hits emitted so far. `catalog`
/// (optional) supplies names and kinds.
SemanticSearchResult search_embedding(const Store& store, std::span<const float> query,
                                      const ThresholdSchedule& schedule, std::size_t k,
                                      const HitCallback& on_hit = {},
                                      const Catalog* catalog = nullptr);

/// Embeds `query` once and runs search_embedding. A degenerate query vector
/// yields an empty result with status kDegenerateQuery. Throws
/// kInvalidArgument when k == 0.
SemanticSearchResult search_stream(const Store& store, const ModelWeights& weights,
                                   std::string_view query,
                                   const ThresholdSchedule& schedule, std::size_t k,
                                   const HitCallback& on_hit = {},
                                   const Catalog* catalog = nullptr);

/// Case-insensitive substring match of the raw query against display names,
/// in item order. The empty query matches everything.
std::vector<SearchHit> standard_search(std::span<const IndexItem> items,
                                       std::string_view query);
std::vector<SearchHit> standard_search(const Catalog& catalog, std::string_view query);

/// Standard hits first in their order, then semantic hits by descending
/// score, minus any item already present among the standard hits.
std::vector<SearchHit> merge_results(std::span<const SearchHit> standard,
                                     std::span<const SearchHit> semantic);

struct SearchOptions {
  std::size_t k = 20;
  ThresholdSchedule schedule;
  /// Maximum standard hits kept in the merged list (0 = unlimited).
  std::size_t standard_limit = 20;
};

struct SearchResponse {
  std::vector<SearchHit> standard;
  SemanticSearchResult semantic;
  std::vector<SearchHit> merged;
};

/// Combined search. The semantic scan runs on its own thread while the
/// standard search runs on the caller's; `on_hit` receives all standard hits
/// first, then semantic hits as the scan finds them. Always invoked on the
/// caller's thread.
class SearchEngine {
 public:
  SearchEngine(const Store& store, const ModelWeights& weights, const Catalog& catalog)
      : store_(store), weights_(weights), catalog_(catalog) {}

  SearchResponse search(std::string_view query, const SearchOptions& options,
                        const HitCallback& on_hit = {}) const;

 private:
  const Store& store_;
  const ModelWeights& weights_;
  const Catalog& catalog_;
};

}  // namespace everysearch

#endif  // EVERYSEARCH_ENGINE_H_
