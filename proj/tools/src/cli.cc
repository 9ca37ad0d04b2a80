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

#include "everysearch/app/cli.h"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "everysearch/app/server.h"
#include "everysearch/app/wire.h"
#include "everysearch/app/workspace.h"
#include "everysearch/error.h"
#include "everysearch/evalkit.h"
#include "everysearch/indexer.h"
#include "everysearch/trainer.h"
#include "json.hpp"

namespace everysearch::app {
namespace {

using Json = nlohmann::ordered_json;

struct GlobalOptions {
  std::string home;
  std::string weights;
  bool json = false;
};

struct ScheduleOptions {
  float base = ThresholdSchedule{}.base;
  float step = ThresholdSchedule{}.step;
  std::uint32_t every = ThresholdSchedule{}.step_every;

  void attach(CLI::App* cmd) {
    cmd->add_option("--base", base, "Initial similarity threshold")->capture_default_str();
    cmd->add_option("--step", step, "Threshold increase per step")->capture_default_str();
    cmd->add_option("--every", every, "Hits found per threshold step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  ThresholdSchedule schedule() const {
    ThresholdSchedule s{base, step, every};
    s.validate();
    return s;
  }
};

struct IndexOptions {
  bool with_body = false;
  std::size_t body_lines = ExtractOptions{}.body_line_budget;
  std::vector<std::string> ignore;
  std::size_t threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_flag("--with-body", with_body, "Include symbol bodies in item text");
    cmd->add_option("--body-lines", body_lines, "Body line budget per symbol")
        ->capture_default_str();
    cmd->add_option("--ignore", ignore, "Extra fnmatch ignore pattern (repeatable)");
    cmd->add_option("--threads", threads, "Embedding threads (0 = all cores)");
  }
  IndexerConfig config() const {
    IndexerConfig c;
    c.extract.mode = with_body ? TextMode::kWithBody : TextMode::kNameOnly;
    c.extract.body_line_budget = body_lines;
    c.ignore = ignore;
    c.threads = threads;
    return c;
  }
};

Workspace open_workspace(const GlobalOptions& g) {
  std::optional<std::filesystem::path> home;
  if (!g.home.empty()) home = g.home;
  std::optional<std::filesystem::path> weights;
  if (!g.weights.empty()) weights = g.weights;
  return Workspace(resolve_home(home), weights);
}

Store& require_store(Workspace& ws) {
  Store* store = ws.open_store();
  if (store == nullptr) {
    throw Error(ErrorCode::kNotFound,
                "no index at " + ws.store_path().string() + "; run `everysearch index` first");
  }
  return *store;
}

void print_metrics(std::ostream& out, const MetricsReport& r) {
  char line[160];
  std::snprintf(line, sizeof line,
                "threshold %.2f  ndcg@10 %.4f  mrr@10 %.4f  precision %.4f  recall %.4f  "
                "avg_found %.2f\n",
                r.threshold, r.ndcg_at_10, r.mrr_at_10, r.precision, r.recall, r.avg_found);
  out << line;
}

Json metrics_json(const MetricsReport& r) {
  Json j;
  j["threshold"] = r.threshold;
  j["ndcg10"] = r.ndcg_at_10;
  j["mrr10"] = r.mrr_at_10;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["avg_found"] = r.avg_found;
  return j;
}

int cmd_index(const GlobalOptions& g, const std::string& root, const IndexOptions& opts,
              bool sync, std::ostream& out, std::ostream& err) {
  Workspace ws = open_workspace(g);
  Store& store = ws.create_store(sync ? Durability::kSync : Durability::kFlush);
  Indexer indexer(store, ws.weights(), ws.catalog(), opts.config());
  indexer.on_warning = [&err](const std::string& w) { err << "warning: " << w << "\n"; };
  const IndexReport r = indexer.index_project(root);
  ws.save_catalog();
  if (g.json) {
    Json j;
    j["files"] = r.files;
    j["items"] = r.items;
    j["embedded"] = r.embedded;
    j["removed"] = r.removed;
    j["seconds"] = r.seconds;
    j["items_per_second"] = r.items_per_second;
    j["ms_per_item"] = r.ms_per_item;
    out << j.dump() << "\n";
  } else {
    char line[200];
    std::snprintf(line, sizeof line,
                  "indexed %zu files: %zu items (%zu embedded, %zu removed) in %.2f s, "
                  "%.3f ms/item\n",
                  r.files, r.items, r.embedded, r.removed, r.seconds, r.ms_per_item);
    out << line;
  }
  return kExitOk;
}

int cmd_query(const GlobalOptions& g, const std::string& text, std::size_t k,
              const ScheduleOptions& sched, std::ostream& out, std::ostream& err) {
  Workspace ws = open_workspace(g);
  SearchOptions options;
  options.k = k;
  options.standard_limit = k;
  options.schedule = sched.schedule();
  const SearchResponse response = run_query(ws, text, options);
  if (g.json) {
    out << done_json(text, response) << "\n";
    return kExitOk;
  }
  if (!response.semantic.warning.empty()) err << "warning: " << response.semantic.warning << "\n";
  if (response.merged.empty()) out << "no results\n";
  for (const SearchHit& hit : response.merged) {
    char score[32];
    if (hit.source == HitSource::kStandard) {
      std::snprintf(score, sizeof score, "%8s", "exact");
    } else {
      std::snprintf(score, sizeof score, "%8.4f", hit.score);
    }
    out << score << "  " << to_string(hit.kind) << "  " << hit.name << "  (" << hit.item_id
        << ")\n";
  }
  return kExitOk;
}

int cmd_train(const GlobalOptions& g, const std::string& pairs_path, TrainConfig config,
              std::string out_path, std::ostream& out) {
  config.validate();
  Workspace ws = open_workspace(g);
  const std::vector<TrainingPair> pairs = load_training_pairs(pairs_path);
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no training pairs in " + pairs_path);
  const float initial = mean_loss(ws.weights(), pairs, config.margins);
  TrainResult result = train(ws.weights(), pairs, config);
  std::filesystem::path dest = out_path.empty() ? ws.default_weights_path() : std::filesystem::path(out_path);
  if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
  save_weights(result.weights, dest);
  const float final_loss = result.loss_history.empty() ? initial : result.loss_history.back();
  if (g.json) {
    Json j;
    j["pairs"] = pairs.size();
    j["epochs"] = config.epochs;
    j["initial_loss"] = initial;
    j["final_loss"] = final_loss;
    j["loss_history"] = result.loss_history;
    j["weights"] = dest.string();
    out << j.dump() << "\n";
  } else {
    for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
      out << "epoch " << (e + 1) << "  loss " << result.loss_history[e] << "\n";
    }
    out << "loss " << initial << " -> " << final_loss << "; weights written to "
        << dest.string() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const GlobalOptions& g, const std::string& dataset_path, std::size_t k,
             const ScheduleOptions& sched, std::ostream& out, std::ostream& err) {
  const ThresholdSchedule schedule = sched.schedule();
  Workspace ws = open_workspace(g);
  Store& store = require_store(ws);
  const EvalDataset dataset = load_eval_dataset(dataset_path);
  EvalContext ctx{store, ws.weights(), k};
  const EvalResult result = evaluate(ctx, dataset, schedule);
  for (const std::string& w : result.warnings) err << "warning: " << w << "\n";
  const MetricsReport& r = result.reports.front();
  if (g.json) {
    Json j = metrics_json(r);
    j["queries"] = result.evaluated_queries;
    j["warnings"] = result.warnings;
    out << j.dump() << "\n";
  } else {
    out << result.evaluated_queries << " queries\n";
    print_metrics(out, r);
  }
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, const std::string& dataset_path,
              const std::vector<float>& thresholds, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  Workspace ws = open_workspace(g);
  Store& store = require_store(ws);
  const EvalDataset dataset = load_eval_dataset(dataset_path);
  EvalContext ctx{store, ws.weights(), 10};
  const EvalResult result = threshold_sweep(ctx, dataset, thresholds);
  for (const std::string& w : result.warnings) err << "warning: " << w << "\n";
  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::kIo, "cannot write " + out_path);
    write_sweep_csv(file, result.reports);
    if (!file.flush()) throw Error(ErrorCode::kIo, "cannot write " + out_path);
  }
  if (g.json) {
    Json rows = Json::array();
    for (const MetricsReport& r : result.reports) rows.push_back(metrics_json(r));
    out << rows.dump() << "\n";
  } else if (out_path.empty()) {
    write_sweep_csv(out, result.reports);
  } else {
    out << result.reports.size() << " rows written to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_serve(const GlobalOptions& g, ServerConfig config, std::ostream& out) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Workspace ws = open_workspace(g);
  SearchServer server(ws, std::move(config));
  const int port = server.bind();
  out << "listening on http://" << "127.0.0.1:" << port << "\n" << std::flush;
  server.start();
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embedding-based project search", "everysearch"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--home", g.home, "Workspace directory (default $EVERYSEARCH_HOME or .everysearch)");
  app.add_option("--weights", g.weights, "Model weights file");
  app.add_flag("--json", g.json, "Machine-readable output");

  std::string root;
  IndexOptions index_opts;
  bool sync = false;
  CLI::App* index = app.add_subcommand("index", "Index a project tree");
  index->add_option("root", root, "Project root")->required();
  index_opts.attach(index);
  index->add_flag("--sync", sync, "fdatasync every store write");

  std::string query_text;
  std::size_t query_k = SearchOptions{}.k;
  ScheduleOptions query_sched;
  CLI::App* query = app.add_subcommand("query", "Search the index");
  query->add_option("text", query_text, "Query text")->required();
  query->add_option("-k,--k", query_k, "Maximum results")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  query_sched.attach(query);

  std::string pairs_path;
  std::string train_out;
  TrainConfig train_config;
  CLI::App* train_cmd = app.add_subcommand("train", "Fine-tune the model on labeled pairs");
  train_cmd->add_option("pairs", pairs_path, "TSV of label<TAB>query<TAB>item")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", train_config.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train_config.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch", train_config.batch_size)->capture_default_str();
  train_cmd->add_option("--seed", train_config.seed)->capture_default_str();
  train_cmd->add_option("--out", train_out, "Output weights (default <home>/weights.embw)");

  std::string eval_path;
  std::size_t eval_k = 10;
  ScheduleOptions eval_sched;
  CLI::App* eval = app.add_subcommand("eval", "Ranking metrics on a query dataset");
  eval->add_option("dataset", eval_path, "TSV of query<TAB>id1,id2,...")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("-k,--k", eval_k)->check(CLI::PositiveNumber)->capture_default_str();
  eval_sched.attach(eval);

  std::string sweep_path;
  std::vector<float> thresholds;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "Metrics across fixed thresholds");
  sweep->add_option("dataset", sweep_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("--thresholds", thresholds, "Comma-separated thresholds")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_out, "Write CSV here instead of stdout");

  ServerConfig server_config;
  ScheduleOptions serve_sched;
  IndexOptions serve_index_opts;
  std::string serve_root;
  CLI::App* serve = app.add_subcommand("serve", "Serve /search and /status over HTTP");
  serve->add_option("--port", server_config.port)->required()->check(CLI::Range(1, 65535));
  serve->add_option("--host", server_config.host)->capture_default_str();
  serve->add_option("-k,--k", server_config.search.k)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--index", serve_root, "Index this tree in the background");
  serve_sched.attach(serve);
  serve_index_opts.attach(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (index->parsed()) return cmd_index(g, root, index_opts, sync, out, err);
    if (query->parsed()) return cmd_query(g, query_text, query_k, query_sched, out, err);
    if (train_cmd->parsed()) return cmd_train(g, pairs_path, train_config, train_out, out);
    if (eval->parsed()) return cmd_eval(g, eval_path, eval_k, eval_sched, out, err);
    if (sweep->parsed()) return cmd_sweep(g, sweep_path, thresholds, sweep_out, out, err);
    if (serve->parsed()) {
      server_config.search.schedule = serve_sched.schedule();
      server_config.search.standard_limit = server_config.search.k;
      server_config.indexer = serve_index_opts.config();
      if (!serve_root.empty()) server_config.index_root = serve_root;
      return cmd_serve(g, std::move(server_config), out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace everysearch::app
