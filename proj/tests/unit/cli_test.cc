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

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "test_support.h"

namespace everysearch::app {
namespace {

using testing::TempDir;
using testing::write_text;

const std::filesystem::path kTinyFixture = EVERYSEARCH_FIXTURE_DIR "/tiny";

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "everysearch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  std::string home() const { return (dir_ / "home").string(); }
  TempDir dir_;
};

TEST_F(CliTest, UnknownSubcommandPrintsUsage) {
  const CliRun r = run({"frobnicate"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"query"}).code, kExitUsage);
}

TEST_F(CliTest, HelpSucceeds) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("sweep"), std::string::npos);
}

TEST_F(CliTest, EmptyQueryOnMissingStore) {
  const CliRun r = run({"--home", home(), "--json", "query", ""});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "{\"query\":\"\",\"results\":[]}\n");
}

TEST_F(CliTest, IndexTinyFixture) {
  const CliRun r = run({"--home", home(), "--json", "index", kTinyFixture.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["items"], 5);
  EXPECT_EQ(report["files"], 3);
  EXPECT_EQ(report["embedded"], 5);
  EXPECT_TRUE(report.contains("ms_per_item"));

  const CliRun text = run({"--home", home(), "index", kTinyFixture.string()});
  EXPECT_EQ(text.code, kExitOk);
  EXPECT_NE(text.out.find("5 items (0 embedded"), std::string::npos) << text.out;
}

TEST_F(CliTest, QueryFindsIndexedSymbol) {
  ASSERT_EQ(run({"--home", home(), "index", kTinyFixture.string()}).code, kExitOk);
  const CliRun r = run({"--home", home(), "--json", "query", "parse_header", "--k", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto done = nlohmann::json::parse(r.out);
  ASSERT_FALSE(done["results"].empty());
  EXPECT_EQ(done["results"][0]["item_id"], "symbol:src/header.rs:parse_header");
  EXPECT_EQ(done["results"][0]["source"], "standard");
  EXPECT_EQ(done["results"][0]["kind"], "symbol");

  const CliRun plain = run({"--home", home(), "query", "parse header"});
  EXPECT_NE(plain.out.find("parse_header"), std::string::npos);
}

TEST_F(CliTest, HomeFromEnvironment) {
  setenv("EVERYSEARCH_HOME", home().c_str(), 1);
  const CliRun r = run({"index", kTinyFixture.string()});
  unsetenv("EVERYSEARCH_HOME");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "home" / "vectors.embs"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "home" / "catalog.json"));
}

TEST_F(CliTest, SweepWritesOneRowPerThreshold) {
  ASSERT_EQ(run({"--home", home(), "index", kTinyFixture.string()}).code, kExitOk);
  write_text(dir_ / "ds.tsv", "parse header\tsymbol:src/header.rs:parse_header\n"
                              "main entry\tsymbol:src/main.py:main\n");
  const CliRun r = run({"--home", home(), "sweep", (dir_ / "ds.tsv").string(), "--thresholds",
                        "0.2,0.4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "threshold,ndcg10,mrr10,precision,recall,avg_found");
  EXPECT_EQ(rows[1].substr(0, 9), "0.200000,");
  EXPECT_EQ(rows[2].substr(0, 9), "0.400000,");

  const auto csv = dir_ / "out.csv";
  ASSERT_EQ(run({"--home", home(), "sweep", (dir_ / "ds.tsv").string(), "--thresholds", "0.1",
                 "--out", csv.string()})
                .code,
            kExitOk);
  EXPECT_EQ(testing::read_text(csv).substr(0, 9), "threshold");
}

TEST_F(CliTest, EvalReportsMetrics) {
  ASSERT_EQ(run({"--home", home(), "index", kTinyFixture.string()}).code, kExitOk);
  write_text(dir_ / "ds.tsv", "parseHeader\tsymbol:src/header.rs:parse_header\n");
  const CliRun r = run({"--home", home(), "--json", "eval", (dir_ / "ds.tsv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["queries"], 1);
  EXPECT_DOUBLE_EQ(j["mrr10"].get<double>(), 1.0);
}

TEST_F(CliTest, TrainWritesWeightsUsedByLaterCommands) {
  write_text(dir_ / "pairs.tsv", "1\topen file\topenFileAction\n0\topen file\tcloseWindow\n");
  const CliRun r = run({"--home", home(), "--json", "train", (dir_ / "pairs.tsv").string(),
                        "--epochs", "3", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["loss_history"].size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "home" / "weights.embw"));
  EXPECT_EQ(std::filesystem::file_size(dir_ / "home" / "weights.embw"), 8'520'464u);
  EXPECT_EQ(run({"--home", home(), "index", kTinyFixture.string()}).code, kExitOk);
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  write_text(dir_ / "ds.tsv", "q\tfile:a\n");
  const CliRun no_store = run({"--home", home(), "eval", (dir_ / "ds.tsv").string()});
  EXPECT_EQ(no_store.code, kExitRuntime);
  EXPECT_NE(no_store.err.find("error:"), std::string::npos);
  EXPECT_EQ(run({"--home", home(), "index", (dir_ / "missing").string()}).code, kExitRuntime);
  EXPECT_EQ(run({"--home", home(), "--weights", (dir_ / "nope.embw").string(), "query", "x"}).code,
            kExitRuntime);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({"--home", home(), "query", "x", "--k", "0"}).code, kExitUsage);
  EXPECT_EQ(run({"--home", home(), "serve", "--port", "0"}).code, kExitUsage);
  EXPECT_EQ(run({"--home", home(), "serve"}).code, kExitUsage);
  EXPECT_EQ(run({"--home", home(), "query", "x", "--step", "-1"}).code, kExitUsage);
  EXPECT_EQ(run({"--home", home(), "train", (dir_ / "none.tsv").string()}).code, kExitUsage);
}

}  // namespace
}  // namespace everysearch::app
