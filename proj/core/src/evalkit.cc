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

#include "everysearch/evalkit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "everysearch/detail/binary_io.h"
#include "everysearch/error.h"

namespace everysearch {
namespace {

std::unordered_set<std::string_view> relevant_set(std::span<const std::string> relevant,
                                                  std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (relevant.empty()) throw Error(ErrorCode::kInvalidArgument, "relevant set is empty");
  return {relevant.begin(), relevant.end()};
}

struct ScoredItem {
  std::string id;
  float score;
};

// Fixed-threshold ranking: items at or above `threshold`, best first, top k.
std::vector<std::string> rank_at(const std::vector<ScoredItem>& scored, float threshold,
                                 std::size_t k) {
  std::vector<const ScoredItem*> kept;
  for (const auto& s : scored) {
    if (s.score >= threshold) kept.push_back(&s);
  }
  auto better = [](const ScoredItem* a, const ScoredItem* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->id < b->id;
  };
  const std::size_t n = std::min(k, kept.size());
  std::partial_sort(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(n), kept.end(), better);
  std::vector<std::string> ranking;
  for (std::size_t i = 0; i < n; ++i) ranking.push_back(kept[i]->id);
  return ranking;
}

struct PreparedQuery {
  const EvalQuery* query;
  Embedding embedding;
  std::vector<ScoredItem> scored;
  std::vector<ScoredLabel> labels;
};

std::vector<PreparedQuery> prepare(const EvalContext& ctx, const EvalDataset& dataset,
                                   std::vector<std::string>& warnings) {
  std::vector<PreparedQuery> out;
  for (std::size_t qi = 0; qi < dataset.queries.size(); ++qi) {
    const EvalQuery& q = dataset.queries[qi];
    const std::string where = "query " + std::to_string(qi + 1) + " \"" + q.query_text + "\"";
    if (q.relevant_ids.empty()) {
      warnings.push_back(where + ": no relevant ids, skipped");
      continue;
    }
    std::vector<std::string> missing;
    for (const auto& id : q.relevant_ids) {
      if (!ctx.store.contains(id)) missing.push_back(id);
    }
    if (!missing.empty()) {
      std::string msg = where + ": missing items";
      for (const auto& id : missing) msg += " " + id;
      warnings.push_back(msg + ", skipped");
      continue;
    }
    PreparedQuery p{&q, {}, {}, {}};
    try {
      p.embedding = embed_text(ctx.weights, q.query_text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateVector) throw;
      warnings.push_back(where + ": degenerate query embedding, skipped");
      continue;
    }
    const std::unordered_set<std::string_view> rel(q.relevant_ids.begin(), q.relevant_ids.end());
    ctx.store.scan([&](const ScanRecord& rec) {
      float score;
      try {
        score = cosine_similarity(p.embedding.values(), rec.values);
      } catch (const Error&) {
        return;  // zero vector in store
      }
      p.scored.push_back({std::string(rec.item_id), score});
      p.labels.push_back({score, rel.count(rec.item_id) != 0});
    });
    out.push_back(std::move(p));
  }
  return out;
}

struct Accumulator {
  double ndcg = 0.0;
  double mrr = 0.0;
  std::size_t predicted = 0;
  std::size_t true_positives = 0;
  std::size_t relevant = 0;
  std::size_t queries = 0;

  void add_classification(const Classification& c) {
    predicted += c.predicted;
    true_positives += c.true_positives;
    relevant += c.relevant;
  }

  MetricsReport report(double threshold) const {
    MetricsReport r;
    r.threshold = threshold;
    const double n = queries ? static_cast<double>(queries) : 1.0;
    r.ndcg_at_10 = queries ? ndcg / n : 0.0;
    r.mrr_at_10 = queries ? mrr / n : 0.0;
    r.precision = predicted ? static_cast<double>(true_positives) / predicted : 1.0;
    r.recall = relevant ? static_cast<double>(true_positives) / relevant : 1.0;
    r.avg_found = queries ? static_cast<double>(predicted) / n : 0.0;
    return r;
  }
};

}  // namespace

EvalDataset load_eval_dataset(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  EvalDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (tab == std::string::npos) throw Error(ErrorCode::kCorrupt, where + ": expected query<TAB>ids");
    EvalQuery q;
    q.query_text = line.substr(0, tab);
    std::string ids = line.substr(tab + 1);
    std::size_t start = 0;
    while (start <= ids.size()) {
      const auto comma = ids.find(',', start);
      std::string id = ids.substr(start, comma == std::string::npos ? comma : comma - start);
      while (!id.empty() && id.front() == ' ') id.erase(id.begin());
      while (!id.empty() && id.back() == ' ') id.pop_back();
      if (!id.empty()) q.relevant_ids.push_back(std::move(id));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (q.relevant_ids.empty()) throw Error(ErrorCode::kCorrupt, where + ": no relevant ids");
    ds.queries.push_back(std::move(q));
  }
  return ds;
}

double ndcg_at_k(std::span<const std::string> ranking, std::span<const std::string> relevant,
                 std::size_t k) {
  const auto rel = relevant_set(relevant, k);
  std::unordered_set<std::string_view> credited;
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (rel.count(ranking[i]) && credited.insert(ranking[i]).second) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double ideal = 0.0;
  const std::size_t ideal_depth = std::min(k, rel.size());
  for (std::size_t i = 0; i < ideal_depth; ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

double mrr_at_k(std::span<const std::string> ranking, std::span<const std::string> relevant,
                std::size_t k) {
  const auto rel = relevant_set(relevant, k);
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (rel.count(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

Classification classification_at_threshold(std::span<const ScoredLabel> scores, float threshold) {
  Classification c;
  for (const auto& s : scores) {
    const bool predicted = s.score >= threshold;
    c.predicted += predicted;
    c.relevant += s.relevant;
    c.true_positives += predicted && s.relevant;
  }
  c.precision = c.predicted ? static_cast<double>(c.true_positives) / c.predicted : 1.0;
  c.recall = c.relevant ? static_cast<double>(c.true_positives) / c.relevant : 1.0;
  return c;
}

EvalResult threshold_sweep(const EvalContext& context, const EvalDataset& dataset,
                           std::span<const float> thresholds) {
  if (thresholds.empty()) throw Error(ErrorCode::kInvalidArgument, "no thresholds to sweep");
  if (context.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  EvalResult result;
  const std::vector<PreparedQuery> prepared = prepare(context, dataset, result.warnings);
  result.evaluated_queries = prepared.size();
  for (float t : thresholds) {
    Accumulator acc;
    for (const auto& p : prepared) {
      const std::vector<std::string> ranking = rank_at(p.scored, t, context.k);
      acc.ndcg += ndcg_at_k(ranking, p.query->relevant_ids, context.k);
      acc.mrr += mrr_at_k(ranking, p.query->relevant_ids, context.k);
      acc.add_classification(classification_at_threshold(p.labels, t));
      ++acc.queries;
    }
    result.reports.push_back(acc.report(t));
  }
  return result;
}

EvalResult evaluate(const EvalContext& context, const EvalDataset& dataset,
                    const ThresholdSchedule& schedule) {
  schedule.validate();
  EvalResult result;
  const std::vector<PreparedQuery> prepared = prepare(context, dataset, result.warnings);
  result.evaluated_queries = prepared.size();
  Accumulator acc;
  for (const auto& p : prepared) {
    const SemanticSearchResult found =
        search_embedding(context.store, p.embedding.values(), schedule, context.k);
    std::vector<std::string> ranking;
    for (const auto& hit : found.ranking) ranking.push_back(hit.item_id);
    acc.ndcg += ndcg_at_k(ranking, p.query->relevant_ids, context.k);
    acc.mrr += mrr_at_k(ranking, p.query->relevant_ids, context.k);
    acc.add_classification(classification_at_threshold(p.labels, schedule.base));
    ++acc.queries;
  }
  MetricsReport r = acc.report(schedule.base);
  result.reports.push_back(r);
  return result;
}

void write_sweep_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << "threshold,ndcg10,mrr10,precision,recall,avg_found\n";
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.threshold, r.ndcg_at_10,
                  r.mrr_at_10, r.precision, r.recall, r.avg_found);
    out << line;
  }
}

}  // namespace everysearch
