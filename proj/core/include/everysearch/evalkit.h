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

#ifndef EVERYSEARCH_EVALKIT_H_
#define EVERYSEARCH_EVALKIT_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "everysearch/catalog.h"
#include "everysearch/embedder.h"
#include "everysearch/engine.h"
#include "everysearch/store.h"

namespace everysearch {

struct EvalQuery {
  std::string query_text;
  std::vector<std::string> relevant_ids;
};

struct EvalDataset {
  std::vector<EvalQuery> queries;
};

/// Lines of `query<TAB>id1,id2,...`. Blank and '#' lines are skipped.
/// Throws kCorrupt on lines without a tab or without ids.
EvalDataset load_eval_dataset(const std::filesystem::path& path);

/// Binary-relevance NDCG: DCG = sum over ranks i <= k of rel(i) / log2(i + 1);
/// the ideal DCG places min(k, |relevant|) relevant items first. Duplicate
/// ids in `relevant` count once; a relevant id repeated in `ranking` is
/// credited at its first position only. Throws kInvalidArgument on k == 0 or an
/// empty relevant set.
double ndcg_at_k(std::span<const std::string> ranking,
                 std::span<const std::string> relevant, std::size_t k);

/// 1 / rank of the first relevant item within the top k, else 0.
double mrr_at_k(std::span<const std::string> ranking,
                std::span<const std::string> relevant, std::size_t k);

struct ScoredLabel {
  float score = 0.0f;
  bool relevant = false;
};

struct Classification {
  double precision = 1.0;  // 1.0 when nothing is predicted
  double recall = 1.0;     // 1.0 when nothing is relevant
  std::size_t predicted = 0;
  std::size_t true_positives = 0;
  std::size_t relevant = 0;
};

/// Predicted relevant means score >= threshold.
Classification classification_at_threshold(std::span<const ScoredLabel> scores,
                                           float threshold);

struct MetricsReport {
  double threshold = 0.0;
  double ndcg_at_10 = 0.0;
  double mrr_at_10 = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  double avg_found = 0.0;  // mean predicted-relevant items per query
};

struct EvalContext {
  const Store& store;
  const ModelWeights& weights;
  std::size_t k = 10;
};

struct EvalResult {
  std::vector<MetricsReport> reports;  // one per threshold, in input order
  std::vector<std::string> warnings;
  std::size_t evaluated_queries = 0;
};

/// For each fixed threshold, ranks every query's scan (top-k of items with
/// cosine >= threshold) and scores all stored items for precision/recall
/// (micro-averaged over queries). Queries referencing ids missing from the
/// store are reported in `warnings` and skipped. Throws kInvalidArgument on
/// an empty threshold list.
EvalResult threshold_sweep(const EvalContext& context, const EvalDataset& dataset,
                           std::span<const float> thresholds);

/// Ranking metrics under a (possibly dynamic) schedule; precision and
/// recall are taken at the schedule's base threshold.
EvalResult evaluate(const EvalContext& context, const EvalDataset& dataset,
                    const ThresholdSchedule& schedule);

/// Header `threshold,ndcg10,mrr10,precision,recall,avg_found`, one row per
/// report, six decimals.
void write_sweep_csv(std::ostream& out, std::span<const MetricsReport> reports);

}  // namespace everysearch

#endif  // EVERYSEARCH_EVALKIT_H_
