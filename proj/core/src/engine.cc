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

#include "everysearch/engine.h"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "everysearch/error.h"

namespace everysearch {
namespace {

// Accumulates in double so that results do not depend on vector scale.
std::optional<float> cosine(std::span<const float> a, std::span<const float> b) noexcept {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double{a[i]} * b[i];
    na += double{a[i]} * a[i];
    nb += double{b[i]} * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) return std::nullopt;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return static_cast<float>(std::clamp(c, -1.0, 1.0));
}

SearchHit make_hit(std::string_view id, float score, HitSource source,
                   const Catalog* catalog) {
  SearchHit hit;
  hit.item_id = std::string(id);
  hit.score = score;
  hit.source = source;
  std::optional<IndexItem> item = catalog ? catalog->find(id) : std::nullopt;
  if (!item) item = describe_item_id(id);
  hit.kind = item->kind;
  hit.name = std::move(item->display_name);
  return hit;
}

}  // namespace

std::string_view to_string(HitSource source) noexcept {
  return source == HitSource::kStandard ? "standard" : "semantic";
}

bool ranks_before(const SearchHit& a, const SearchHit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.item_id < b.item_id;
}

void ThresholdSchedule::validate() const {
  if (!std::isfinite(base) || !std::isfinite(step) || step < 0.0f) {
    throw Error(ErrorCode::kInvalidArgument, "threshold step must be finite and >= 0");
  }
  if (step_every == 0) throw Error(ErrorCode::kInvalidArgument, "step_every must be positive");
}

float effective_threshold(const ThresholdSchedule& schedule, std::size_t found_count) {
  const double raised = double{schedule.base} +
                        double{schedule.step} * static_cast<double>(found_count / schedule.step_every);
  return static_cast<float>(std::min(raised, double{kMaxThreshold}));
}

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine of vectors with different sizes");
  }
  const auto c = cosine(a, b);
  if (!c) throw Error(ErrorCode::kDegenerateVector, "cosine with a zero vector");
  return *c;
}

SemanticSearchResult search_embedding(const Store& store, std::span<const float> query,
                                      const ThresholdSchedule& schedule, std::size_t k,
                                      const HitCallback& on_hit, const Catalog* catalog) {
  schedule.validate();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (query.size() != store.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim differs from store dim");
  }
  SemanticSearchResult result;
  // Max-heap under ranks_before: the front is the worst of the current top k.
  std::vector<SearchHit> top;
  top.reserve(k + 1);
  store.scan([&](const ScanRecord& rec) {
    const auto score = cosine(query, rec.values);
    if (!score) return;
    const float threshold = effective_threshold(schedule, result.emitted.size());
    if (*score < threshold) return;
    SearchHit hit = make_hit(rec.item_id, *score, HitSource::kSemantic, catalog);
    if (on_hit) on_hit(hit);
    if (top.size() < k) {
      top.push_back(hit);
      std::push_heap(top.begin(), top.end(), ranks_before);
    } else if (ranks_before(hit, top.front())) {
      std::pop_heap(top.begin(), top.end(), ranks_before);
      top.back() = hit;
      std::push_heap(top.begin(), top.end(), ranks_before);
    }
    result.emitted.push_back(EmittedHit{std::move(hit), threshold});
  });
  std::sort_heap(top.begin(), top.end(), ranks_before);
  result.ranking = std::move(top);
  return result;
}

SemanticSearchResult search_stream(const Store& store, const ModelWeights& weights,
                                   std::string_view query, const ThresholdSchedule& schedule,
                                   std::size_t k, const HitCallback& on_hit,
                                   const Catalog* catalog) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  schedule.validate();
  Embedding q;
  try {
    q = embed_text(weights, query);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateVector) throw;
    SemanticSearchResult empty;
    empty.status = SearchStatus::kDegenerateQuery;
    empty.warning = e.what();
    return empty;
  }
  return search_embedding(store, q.values(), schedule, k, on_hit, catalog);
}

std::vector<SearchHit> standard_search(std::span<const IndexItem> items, std::string_view query) {
  std::vector<SearchHit> hits;
  for (const auto& item : items) {
    if (contains_case_insensitive(item.display_name, query)) {
      hits.push_back(SearchHit{item.id, kStandardHitScore, HitSource::kStandard, item.kind,
                               item.display_name});
    }
  }
  return hits;
}

std::vector<SearchHit> standard_search(const Catalog& catalog, std::string_view query) {
  std::vector<SearchHit> hits;
  catalog.for_each([&](const IndexItem& item) {
    if (contains_case_insensitive(item.display_name, query)) {
      hits.push_back(SearchHit{item.id, kStandardHitScore, HitSource::kStandard, item.kind,
                               item.display_name});
    }
  });
  return hits;
}

std::vector<SearchHit> merge_results(std::span<const SearchHit> standard,
                                     std::span<const SearchHit> semantic) {
  std::vector<SearchHit> merged(standard.begin(), standard.end());
  std::unordered_set<std::string> seen;
  for (const auto& h : standard) seen.insert(h.item_id);
  std::vector<SearchHit> tail;
  for (const auto& h : semantic) {
    if (seen.insert(h.item_id).second) tail.push_back(h);
  }
  std::stable_sort(tail.begin(), tail.end(),
                   [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
  merged.insert(merged.end(), tail.begin(), tail.end());
  return merged;
}

SearchResponse SearchEngine::search(std::string_view query, const SearchOptions& options,
                                    const HitCallback& on_hit) const {
  if (options.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  options.schedule.validate();

  std::mutex mutex;
  std::condition_variable ready;
  std::deque<SearchHit> pending;
  bool finished = false;
  std::exception_ptr failure;
  SearchResponse response;

  std::jthread semantic([&] {
    try {
      response.semantic = search_stream(
          store_, weights_, query, options.schedule, options.k,
          [&](const SearchHit& hit) {
            std::lock_guard lock(mutex);
            pending.push_back(hit);
            ready.notify_one();
          },
          &catalog_);
    } catch (...) {
      failure = std::current_exception();
    }
    std::lock_guard lock(mutex);
    finished = true;
    ready.notify_one();
  });

  response.standard = standard_search(catalog_, query);
  if (options.standard_limit > 0 && response.standard.size() > options.standard_limit) {
    response.standard.resize(options.standard_limit);
  }
  if (on_hit) {
    for (const auto& hit : response.standard) on_hit(hit);
  }

  for (;;) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return finished || !pending.empty(); });
    if (pending.empty()) break;
    SearchHit hit = std::move(pending.front());
    pending.pop_front();
    lock.unlock();
    if (on_hit) on_hit(hit);
  }
  semantic.join();
  if (failure) std::rethrow_exception(failure);

  response.merged = merge_results(response.standard, response.semantic.ranking);
  return response;
}

}  // namespace everysearch
