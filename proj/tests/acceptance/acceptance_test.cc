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

// Acceptance checks for the primary criteria. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails.

#include <immintrin.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "convergence.h"
#include "everysearch/app/server.h"
#include "everysearch/app/workspace.h"
#include "everysearch/catalog.h"
#include "everysearch/embedder.h"
#include "everysearch/engine.h"
#include "everysearch/evalkit.h"
#include "everysearch/indexer.h"
#include "everysearch/store.h"
#include "everysearch/trainer.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.h"
#include "sse.h"
#include "test_support.h"

namespace everysearch {
namespace {

using testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// Item embed+store throughput on a 10k-item synthetic corpus, read from the
// indexer's own report.
Outcome indexing_throughput() {
  TempDir dir;
  testing::write_synthetic_project(dir / "proj", 10000, 1);
  const ModelWeights weights = make_default_weights();
  Store store = Store::open_or_create(dir / "v.embs", 128);
  Catalog catalog;
  IndexerConfig config;
  config.threads = 1;
  Indexer indexer(store, weights, catalog, config);
  const IndexReport report = indexer.index_project(dir / "proj");
  const bool pass = report.items == 10000 && report.embedded == 10000 &&
                    report.ms_per_item <= 5.0;
  return {pass, fmt("%.0f items, %.4f ms/item (limit 5 ms), %.2f s total",
                    static_cast<double>(report.items), report.ms_per_item, report.seconds)};
}

Outcome model_footprint() {
  TempDir dir;
  const auto path = dir / "w.embw";
  save_weights(make_default_weights(), path);
  const auto bytes = std::filesystem::file_size(path);
  const double limit = 12.0 * 1024 * 1024;
  return {static_cast<double>(bytes) <= limit,
          fmt("%.0f bytes (%.2f MiB, limit 12 MiB)", static_cast<double>(bytes),
              static_cast<double>(bytes) / (1024.0 * 1024.0))};
}

bool cpu_has_f16c() { return __builtin_cpu_supports("avx") && __builtin_cpu_supports("f16c"); }

__attribute__((target("f16c"))) std::uint16_t hw_encode(float x) {
  return static_cast<std::uint16_t>(_cvtss_sh(x, _MM_FROUND_TO_NEAREST_INT));
}

__attribute__((target("f16c"))) float hw_decode(std::uint16_t bits) { return _cvtsh_ss(bits); }

// Without F16C, check the half-precision rounding bound instead of bits.
bool within_half_ulp(float original, float stored) {
  const float mag = std::fabs(original);
  const float bound = mag < 6.1035156e-05f ? 2.9802322e-08f : mag * 0.00048828125f;
  return std::fabs(original - stored) <= bound;
}

Outcome storage_exactness() {
  TempDir dir;
  const auto path = dir / "v.embs";
  constexpr std::size_t kCount = 10000;
  constexpr std::uint16_t kDim = 128;
  const bool hw = cpu_has_f16c();
  std::mt19937_64 rng(7);
  std::vector<std::vector<float>> vectors;
  vectors.reserve(kCount);
  {
    Store store = Store::open_or_create(path, kDim);
    for (std::size_t i = 0; i < kCount; ++i) {
      vectors.push_back(testing::random_unit_vector(rng, kDim));
      store.put("item-" + std::to_string(i), vectors.back());
    }
  }
  // Reopen so every read comes from the file.
  Store store = Store::open(path);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < kCount; ++i) {
    const std::string id = "item-" + std::to_string(i);
    const auto bits = store.get_bits(id);
    const Embedding got = store.get(id);
    for (std::size_t j = 0; j < kDim; ++j) {
      const float v = vectors[i][j];
      const bool ok = hw ? bits[j] == hw_encode(v) && got[j] == hw_decode(bits[j])
                         : within_half_ulp(v, got[j]);
      if (!ok) ++mismatches;
    }
  }
  const std::uintmax_t expected = kStoreHeaderSize + kCount * kDim * 2;
  const std::uintmax_t actual = std::filesystem::file_size(path);
  return {mismatches == 0 && actual == expected && store.size() == kCount,
          fmt("%.0f component mismatches, file %.0f bytes (expected %.0f)",
              static_cast<double>(mismatches), static_cast<double>(actual),
              static_cast<double>(expected)) +
              (hw ? ", F16C oracle" : ", rounding-bound oracle")};
}

Outcome incremental_convergence() {
  TempDir dir;
  const ModelWeights weights = make_default_weights();
  constexpr int kTrials = 100;
  int converged = 0;
  std::string first_failure;
  for (int seed = 0; seed < kTrials; ++seed) {
    const TextMode mode = seed % 4 == 3 ? TextMode::kWithBody : TextMode::kNameOnly;
    const auto r = testing::run_convergence_trial(weights, 1000 + seed, 200,
                                                  dir / std::to_string(seed), mode);
    if (r.converged) {
      ++converged;
    } else if (first_failure.empty()) {
      first_failure = "; seed " + std::to_string(1000 + seed) + ": " + r.detail;
    }
    std::filesystem::remove_all(dir / std::to_string(seed));
  }
  return {converged == kTrials,
          fmt("%.0f/%.0f trials of 200 changes converged", converged, kTrials) + first_failure};
}

// Unit vector on a coarse grid, so that exact score ties are common.
std::vector<float> grid_unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::vector<float> v(dim);
  double sq = 0.0;
  while (sq == 0.0) {
    sq = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(static_cast<int>(rng() % 3) - 1);
      sq += x * x;
    }
  }
  const float inv = static_cast<float>(1.0 / std::sqrt(sq));
  for (auto& x : v) x *= inv;
  return v;
}

Outcome search_correctness() {
  TempDir dir;
  std::mt19937_64 rng(2024);
  constexpr int kStores = 1000;
  constexpr std::uint16_t kDims[] = {4, 16, 64, 128};
  int matched = 0;
  std::size_t largest = 0;
  std::string first_failure;
  for (int trial = 0; trial < kStores; ++trial) {
    // Log-uniform sizes up to 10k; the last store is exactly 10k.
    const std::size_t target =
        trial == kStores - 1
            ? 10000
            : static_cast<std::size_t>(
                  std::exp(std::uniform_real_distribution<double>(0.0, std::log(10000.0))(rng)));
    const std::uint16_t dim = kDims[rng() % 4];
    const bool grid = rng() % 3 == 0;
    const auto path = dir / "s.embs";
    std::filesystem::remove(path);
    std::filesystem::remove(Store::sidecar_path(path));
    Store store = Store::open_or_create(path, dim);
    auto vec = [&] {
      return grid ? grid_unit_vector(rng, dim) : testing::random_unit_vector(rng, dim);
    };
    std::vector<std::string> live;
    std::size_t next_id = 0;
    while (store.size() < target) {
      live.push_back("id" + std::to_string(next_id++));
      store.put(live.back(), vec());
      if (rng() % 8 == 0 && live.size() > 1) {
        // Removals leave free slots that later puts reuse, so scan order
        // differs from insertion order.
        const std::size_t victim = rng() % live.size();
        store.remove(live[victim]);
        live[victim] = live.back();
        live.pop_back();
      }
      if (rng() % 50 == 0 && store.size() < target) {
        // Exact duplicate of an existing vector under a new id.
        const Embedding copy = store.get(live[rng() % live.size()]);
        live.push_back("dup" + std::to_string(next_id++));
        store.put(live.back(), copy);
      }
    }
    largest = std::max(largest, store.size());

    std::vector<testing::OracleRecord> records;
    store.scan([&](const ScanRecord& r) {
      records.push_back({std::string(r.item_id), {r.values.begin(), r.values.end()}});
    });
    const std::vector<float> query = vec();
    const ThresholdSchedule schedule{
        std::uniform_real_distribution<float>(-0.5f, 0.6f)(rng),
        std::uniform_real_distribution<float>(0.0f, 0.1f)(rng),
        static_cast<std::uint32_t>(1 + rng() % 10)};
    const std::size_t k = 1 + rng() % 50;
    const auto got = search_embedding(store, query, schedule, k);
    const auto want = testing::full_sort_oracle(records, query, schedule.base, schedule.step,
                                                schedule.step_every, k);
    bool same = got.ranking.size() == want.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) {
      same = got.ranking[i].item_id == want[i].id && got.ranking[i].score == want[i].score;
    }
    if (same) {
      ++matched;
    } else if (first_failure.empty()) {
      first_failure = "; first mismatch in store " + std::to_string(trial);
    }
  }
  return {matched == kStores,
          fmt("%.0f/%.0f stores match the full-sort oracle, largest %.0f items", matched,
              kStores, static_cast<double>(largest)) +
              first_failure};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(99);
  constexpr int kRankings = 10000;
  std::vector<std::string> pool;
  for (int i = 0; i < 60; ++i) pool.push_back("item" + std::to_string(i));
  double worst = 0.0;
  for (int n = 0; n < kRankings; ++n) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<std::string> ranking(pool.begin(), pool.begin() + rng() % 41);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<std::string> relevant(pool.begin(), pool.begin() + 1 + rng() % 12);
    const std::size_t k = 1 + rng() % 25;
    worst = std::max(worst, std::fabs(ndcg_at_k(ranking, relevant, k) -
                                      testing::brute_force_ndcg(ranking, relevant, k)));
    worst = std::max(worst, std::fabs(mrr_at_k(ranking, relevant, k) -
                                      testing::brute_force_mrr(ranking, relevant, k)));
  }
  return {worst <= 1e-6, fmt("max |difference| %.3g over %.0f rankings (limit 1e-6)", worst,
                             kRankings)};
}

std::string random_phrase(std::mt19937_64& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += testing::random_word(rng);
  }
  return s;
}

Outcome gradient_check_configs() {
  std::mt19937_64 rng(5);
  constexpr int kConfigs = 50;
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  int with_gradient = 0;
  for (int c = 0; c < kConfigs; ++c) {
    ModelDims dims;  // defaults for every tenth configuration
    if (c % 10 != 0) {
      dims = {static_cast<std::uint32_t>(256 + rng() % 4096),
              static_cast<std::uint16_t>(4 + rng() % 60), static_cast<std::uint16_t>(4 + rng() % 60),
              static_cast<std::uint16_t>(4 + rng() % 60)};
    }
    const ModelWeights w = make_default_weights(dims, rng());
    TrainingPair pair{random_phrase(rng, 1 + static_cast<int>(rng() % 4)),
                      random_phrase(rng, 1 + static_cast<int>(rng() % 4)),
                      rng() % 2 ? PairLabel::kPositive : PairLabel::kNegative};
    // A negative pair below the margin has zero loss and a flat gradient;
    // flip it so every configuration exercises backprop.
    if (pair.label == PairLabel::kNegative && mean_loss(w, std::span(&pair, 1)) == 0.0f) {
      pair.label = PairLabel::kPositive;
    }
    const GradientCheckReport r = gradient_check(w, pair, 1e-4, {}, rng(), 40);
    worst = std::max(worst, r.max_relative_error);
    checked += r.checked;
    skipped += r.skipped_at_kink;
    if (r.max_abs_analytic > 0.0) ++with_gradient;
  }
  return {worst < 1e-3 && with_gradient == kConfigs,
          fmt("max relative error %.3g (limit 1e-3), %.0f coordinates", worst,
              static_cast<double>(checked)) +
              fmt(", %.0f skipped at the kink, %.0f/50 configs with nonzero gradient",
                  static_cast<double>(skipped), with_gradient)};
}

// Synonym corpus: each concept has a query word and a different item word.
// Items are camelCase pairs of item words; queries use the query words.
struct SynonymCorpus {
  std::vector<TrainingPair> pairs;                 // 200 training pairs
  std::vector<std::pair<std::string, std::string>> train_items;  // query, item
  std::vector<std::pair<std::string, std::string>> held_out;     // unseen combinations
};

std::string camel(const std::string& a, const std::string& b) {
  std::string s = a + b;
  s[a.size()] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[a.size()])));
  return s;
}

SynonymCorpus make_synonym_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr int kConcepts = 40;
  std::set<std::string> used;
  auto fresh_word = [&] {
    std::string w;
    do {
      w = testing::random_word(rng);
    } while (!used.insert(w).second);
    return w;
  };
  std::vector<std::string> query_word, item_word;
  for (int i = 0; i < kConcepts; ++i) {
    query_word.push_back(fresh_word());
    item_word.push_back(fresh_word());
  }
  std::vector<std::pair<int, int>> combos;
  for (int a = 0; a < kConcepts; ++a) {
    for (int b = 0; b < kConcepts; ++b) {
      if (a != b) combos.emplace_back(a, b);
    }
  }
  std::shuffle(combos.begin(), combos.end(), rng);
  auto make = [&](std::pair<int, int> c) {
    return std::pair{query_word[c.first] + " " + query_word[c.second],
                     camel(item_word[c.first], item_word[c.second])};
  };
  SynonymCorpus corpus;
  std::vector<std::pair<int, int>> train(combos.begin(), combos.begin() + 100);
  for (const auto& c : train) corpus.train_items.push_back(make(c));
  for (std::size_t i = 100; i < 150; ++i) corpus.held_out.push_back(make(combos[i]));
  for (std::size_t i = 0; i < train.size(); ++i) {
    corpus.pairs.push_back({corpus.train_items[i].first, corpus.train_items[i].second,
                            PairLabel::kPositive});
    // Negative: an item sharing no concept with the query.
    std::size_t j = rng() % train.size();
    while (train[j].first == train[i].first || train[j].first == train[i].second ||
           train[j].second == train[i].first || train[j].second == train[i].second) {
      j = rng() % train.size();
    }
    corpus.pairs.push_back({corpus.train_items[i].first, corpus.train_items[j].second,
                            PairLabel::kNegative});
  }
  return corpus;
}

// Mean NDCG@10 of each query against all items of the set, one relevant item
// per query.
double mean_ndcg(const ModelWeights& w,
                 const std::vector<std::pair<std::string, std::string>>& set) {
  std::vector<Embedding> items;
  for (const auto& [q, item] : set) items.push_back(embed_text(w, item));
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Embedding qe = embed_text(w, set[i].first);
    std::vector<std::pair<float, std::size_t>> scored;
    for (std::size_t j = 0; j < items.size(); ++j) {
      scored.emplace_back(cosine_similarity(qe.values(), items[j].values()), j);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> ranking;
    for (const auto& [s, j] : scored) ranking.push_back(std::to_string(j));
    total += ndcg_at_k(ranking, std::vector<std::string>{std::to_string(i)}, 10);
  }
  return total / static_cast<double>(set.size());
}

Outcome training_efficacy() {
  const auto start = Clock::now();
  double gain_train = 0.0;
  double gain_held_out = 0.0;
  constexpr int kSeeds = 5;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const SynonymCorpus corpus = make_synonym_corpus(seed);
    const ModelWeights initial = make_default_weights({}, seed);
    TrainConfig config;
    config.epochs = 30;
    config.learning_rate = 0.05f;
    config.seed = seed;
    const TrainResult trained = train(initial, corpus.pairs, config);
    gain_train += mean_ndcg(trained.weights, corpus.train_items) -
                  mean_ndcg(initial, corpus.train_items);
    gain_held_out += mean_ndcg(trained.weights, corpus.held_out) -
                     mean_ndcg(initial, corpus.held_out);
  }
  gain_train /= kSeeds;
  gain_held_out /= kSeeds;
  const double elapsed = seconds_since(start);
  return {gain_train >= 0.15 && gain_held_out >= 0.15 && elapsed < 300.0,
          fmt("mean NDCG@10 gain %.4f on the training corpus, %.4f on held-out "
              "combinations (limit 0.15 each), %.1f s (limit 300 s)",
              gain_train, gain_held_out, elapsed)};
}

double fixture_mrr(TextMode mode, const std::filesystem::path& scratch) {
  const std::filesystem::path fixture =
      std::filesystem::path(EVERYSEARCH_FIXTURE_DIR) / "body_terms";
  const ModelWeights weights = make_default_weights();
  Store store = Store::open_or_create(scratch / (std::string(to_string(mode)) + ".embs"), 128);
  Catalog catalog;
  IndexerConfig config;
  config.extract.mode = mode;
  config.ignore = {"queries.tsv"};
  Indexer indexer(store, weights, catalog, config);
  indexer.index_project(fixture);
  const EvalDataset dataset = load_eval_dataset(fixture / "queries.tsv");
  const EvalResult r =
      evaluate({store, weights, 10}, dataset, ThresholdSchedule::fixed(-1.0f));
  if (!r.warnings.empty() || r.evaluated_queries != dataset.queries.size()) {
    throw std::runtime_error("fixture queries reference missing items");
  }
  return r.reports.at(0).mrr_at_10;
}

Outcome body_vs_name() {
  TempDir dir;
  const double name_only = fixture_mrr(TextMode::kNameOnly, dir.path());
  const double with_body = fixture_mrr(TextMode::kWithBody, dir.path());
  return {with_body > name_only,
          fmt("MRR@10 with-body %.4f vs name-only %.4f", with_body, name_only)};
}

Outcome sweep_monotonicity() {
  TempDir dir;
  const ModelWeights weights = make_default_weights();
  std::mt19937_64 rng(17);
  int violations = 0;
  int sweeps = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto root = dir / ("p" + std::to_string(trial));
    testing::write_synthetic_project(root, 400, 300 + trial);
    Store store = Store::open_or_create(dir / ("s" + std::to_string(trial) + ".embs"), 128);
    Catalog catalog;
    Indexer indexer(store, weights, catalog);
    indexer.index_project(root);
    const auto ids = store.ids();
    EvalDataset dataset;
    for (int q = 0; q < 30; ++q) {
      EvalQuery query{random_phrase(rng, 1 + static_cast<int>(rng() % 3)), {}};
      const std::size_t n = 1 + rng() % 8;
      for (std::size_t i = 0; i < n; ++i) query.relevant_ids.push_back(ids[rng() % ids.size()]);
      dataset.queries.push_back(std::move(query));
    }
    // Shuffled thresholds: the reports follow input order, so sort before
    // comparing.
    std::vector<float> thresholds;
    for (int t = 0; t <= 40; ++t) thresholds.push_back(-1.0f + 0.05f * static_cast<float>(t));
    for (int t = 0; t < 20; ++t) {
      thresholds.push_back(std::uniform_real_distribution<float>(-1.0f, 1.0f)(rng));
    }
    std::shuffle(thresholds.begin(), thresholds.end(), rng);
    EvalResult r = threshold_sweep({store, weights, 10}, dataset, thresholds);
    std::sort(r.reports.begin(), r.reports.end(),
              [](const auto& a, const auto& b) { return a.threshold < b.threshold; });
    for (std::size_t i = 1; i < r.reports.size(); ++i) {
      if (r.reports[i].recall > r.reports[i - 1].recall) ++violations;
      if (r.reports[i].avg_found > r.reports[i - 1].avg_found) ++violations;
    }
    ++sweeps;
  }
  return {violations == 0,
          fmt("%.0f violations across %.0f sweeps of 61 thresholds", violations, sweeps)};
}

Outcome concurrency() {
  TempDir dir;
  testing::write_synthetic_project(dir / "proj", 10000, 3);
  app::Workspace ws(dir / "home");
  app::ServerConfig config;
  config.port = 0;
  config.index_root = dir / "proj";
  config.indexer.threads = 1;
  app::SearchServer server(ws, config);
  server.start();
  const int port = server.port();

  std::atomic<bool> stop_polling{false};
  std::atomic<int> status_errors{0};
  double max_status_ms = 0.0;
  std::size_t status_polls = 0;
  std::thread poller([&] {
    httplib::Client client("127.0.0.1", port);
    while (!stop_polling.load()) {
      const auto t0 = Clock::now();
      auto res = client.Get("/status");
      const double ms = seconds_since(t0) * 1000.0;
      if (!res || res->status != 200) {
        ++status_errors;
      } else {
        max_status_ms = std::max(max_status_ms, ms);
        ++status_polls;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  });

  // Let the indexer get going so the searches see a growing store.
  const auto wait_start = Clock::now();
  while (server.indexing() && !ws.store_exists() && seconds_since(wait_start) < 10.0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  const bool indexing_at_launch = server.indexing();

  std::atomic<int> search_failures{0};
  std::atomic<int> finished_while_indexing{0};
  std::vector<std::thread> clients;
  const char* queries[] = {"load data", "parse tokens", "open file", "render view"};
  for (int t = 0; t < 16; ++t) {
    clients.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", port);
      client.set_read_timeout(60, 0);
      const std::string q = httplib::detail::encode_url(queries[t % 4]);
      auto res = client.Get("/search?k=10&q=" + q);
      std::vector<testing::SseEvent> events;
      if (!res || res->status != 200 || !testing::parse_sse(res->body, events) ||
          events.empty() || events.back().event != "done") {
        ++search_failures;
      }
      if (server.indexing()) ++finished_while_indexing;
    });
  }
  for (auto& c : clients) c.join();
  server.wait_for_indexing();
  stop_polling = true;
  poller.join();
  const std::string index_error = server.last_index_error();
  server.stop();

  const bool pass = indexing_at_launch && search_failures == 0 && status_errors == 0 &&
                    index_error.empty() && status_polls > 0 && max_status_ms < 100.0;
  return {pass, fmt("16 searches: %.0f failed, %.0f finished during indexing; ",
                    search_failures.load(), finished_while_indexing.load()) +
                    fmt("/status max %.2f ms over %.0f polls (limit 100 ms)", max_status_ms,
                        static_cast<double>(status_polls)) +
                    (indexing_at_launch ? "" : "; indexing had finished before launch") +
                    (index_error.empty() ? "" : "; index error: " + index_error)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace everysearch

int main(int argc, char** argv) {
  using namespace everysearch;
  const std::vector<Criterion> criteria = {
      {"indexing_throughput", indexing_throughput},
      {"model_footprint", model_footprint},
      {"storage_exactness", storage_exactness},
      {"incremental_convergence", incremental_convergence},
      {"search_correctness", search_correctness},
      {"metric_oracles", metric_oracles},
      {"gradient_check", gradient_check_configs},
      {"training_efficacy", training_efficacy},
      {"body_vs_name", body_vs_name},
      {"sweep_monotonicity", sweep_monotonicity},
      {"concurrency", concurrency},
  };
  // Optional filter: run only the named criteria.
  const std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail
              << fmt(" [%.1f s]", seconds_since(start)) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
