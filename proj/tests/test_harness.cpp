//
// Copyright 2026 The sqleq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "sqleq/db_io.hpp"
#include "sqleq/harness.hpp"
#include "sqleq/parser.hpp"
#include "test_util.hpp"

namespace sqleq {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::fixture;

class TempDir {
 public:
  TempDir() {
    static int n = 0;
    path_ = fs::temp_directory_path() / ("sqleq-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string entry(const std::string& qid, const std::string& gold, const json& preds) {
  return json{{"question_id", qid}, {"db_id", "r"}, {"question", "?"}, {"gold", gold}, {"predictions", preds}}
             .dump() +
         "\n";
}

EvalConfig small_config() {
  EvalConfig cfg;
  cfg.task.max_bound = 2;
  cfg.task.budget.cpu_seconds = 60;
  return cfg;
}

TEST(DatasetTest, IngestErrors) {
  TempDir t;
  fs::path d = t.path() / "d.jsonl";
  write(d, "");
  EXPECT_TRUE(load_dataset(d.string()).empty());
  write(d, entry("q1", "SELECT id FROM r", {{"m", "SELECT id FROM r"}}) +
               entry("q1", "SELECT id FROM r", {{"m", "SELECT id FROM r"}}));
  try {
    load_dataset(d.string());
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate question_id q1"), std::string::npos) << e.what();
  }
  write(d, R"({"question_id": "q1", "db_id": "r"})" "\n");
  EXPECT_THROW(load_dataset(d.string()), IngestError);
  write(d, "{not json\n");
  EXPECT_THROW(load_dataset(d.string()), IngestError);
  write(d, entry("q1", "SELECT id FROM r", {{"m", 3}}));
  EXPECT_THROW(load_dataset(d.string()), IngestError);
  EXPECT_THROW(load_dataset((t.path() / "missing.jsonl").string()), IngestError);
  EXPECT_EQ(load_dataset(fixture("motivating.jsonl")).size(), 9u);
}

TEST(EvalTest, EmptyDataset) {
  TempDir t;
  write(t.path() / "d.jsonl", "\n");
  EvalReport r = run_eval((t.path() / "d.jsonl").string(), fixture("schemas"), (t.path() / "out").string(),
                          small_config());
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_FALSE(r.any_inconclusive());
  EXPECT_TRUE(fs::exists(t.path() / "out" / "reports" / "report.txt"));
}

TEST(EvalTest, MissingSchemaIsAnIngestError) {
  TempDir t;
  write(t.path() / "d.jsonl", json{{"question_id", "q"}, {"db_id", "nowhere"}, {"gold", "SELECT 1"},
                                   {"predictions", json::object()}}
                                      .dump());
  EXPECT_THROW(run_eval((t.path() / "d.jsonl").string(), fixture("schemas"), (t.path() / "out").string(),
                        small_config()),
               IngestError);
}

TEST(EvalTest, SmallBatch) {
  TempDir t;
  fs::path schemas = t.path() / "schemas";
  fs::create_directories(schemas);
  fs::copy_file(fixture("schemas/r.json"), schemas / "r.json");
  write(schemas / "r.testdb.sql", "INSERT INTO r VALUES (1, NULL), (3, '2001-02-03');\n");
  const std::string gold = "SELECT id FROM r WHERE id > 1";
  std::string data = entry("q1", gold,
                           {{"wrong", "SELECT id FROM r WHERE id > 2"},
                            {"right", "SELECT id FROM r WHERE id >= 2"},
                            {"syntax", "SELECT id FROM r WHERE"},
                            {"subq", "SELECT id FROM r WHERE id = (SELECT MAX(id) FROM r)"}}) +
                     entry("q0", "SELECT COUNT(*) FROM r",
                           {{"wrong", "SELECT id FROM r"},
                            {"right", "SELECT COUNT(*) FROM r WHERE id IS NULL OR id IS NOT NULL"}});
  write(t.path() / "d.jsonl", data);
  EvalConfig cfg = small_config();
  EvalReport r = run_eval((t.path() / "d.jsonl").string(), schemas.string(), (t.path() / "out").string(), cfg);
  ASSERT_EQ(r.pairs.size(), 6u);
  std::map<std::string, const PairRecord*> by;
  for (const auto& p : r.pairs) by[p.question_id + "/" + p.method] = &p;
  EXPECT_EQ(r.pairs.front().question_id, "q0");

  const PairRecord& wrong = *by.at("q1/wrong");
  EXPECT_EQ(wrong.ex, 1);
  EXPECT_TRUE(wrong.verified);
  EXPECT_EQ(describe(wrong.verdict), "not equivalent at k=1 (validated)");
  fs::path cex = t.path() / "out" / "counterexamples" / "q1" / "wrong";
  ASSERT_TRUE(fs::exists(cex / "db.json"));
  ASSERT_TRUE(fs::exists(cex / "insert.sql"));
  DatabaseSchema s = load_schema_file((schemas / "r.json").string());
  EXPECT_EQ(replay(s, (cex / "db.json").string(), gold, "SELECT id FROM r WHERE id > 2").ex, 0);
  EXPECT_EQ(wrong.dump_hash, dump_hash(load_dump_file((cex / "db.json").string(), s), s));

  EXPECT_EQ(by.at("q1/right")->verdict.kind, Verdict::Kind::EquivalentUpTo);
  EXPECT_FALSE(by.at("q1/syntax")->supported);
  EXPECT_EQ(by.at("q1/syntax")->ex, 0);
  const PairRecord& subq = *by.at("q1/subq");
  EXPECT_FALSE(subq.supported);
  EXPECT_EQ(subq.verdict.reason, InconclusiveReason::Unsupported);
  EXPECT_NE(subq.parse_note.find("scalar subquery"), std::string::npos) << subq.parse_note;
  EXPECT_TRUE(r.any_inconclusive());

  // EX fails on the static database, so it is not verified.
  const PairRecord& q0 = *by.at("q0/wrong");
  EXPECT_EQ(q0.ex, 0);
  EXPECT_FALSE(q0.verified);
  EXPECT_EQ(by.at("q0/right")->verdict.kind, Verdict::Kind::EquivalentUpTo);

  // Scores: q0 and q1 per method.
  std::map<std::string, MethodScore> score;
  for (const auto& m : r.methods) score[m.score.method] = m.score;
  EXPECT_EQ(score.at("right").cc_pass, 2);
  EXPECT_EQ(score.at("wrong").ex_pass, 1);
  EXPECT_EQ(score.at("wrong").verify_pass, 0);

  // Reports are deterministic across runs.
  EvalReport again = run_eval((t.path() / "d.jsonl").string(), schemas.string(), (t.path() / "out2").string(), cfg);
  EXPECT_EQ(report_text(r), report_text(again));
  EXPECT_EQ(read(t.path() / "out" / "reports" / "report.json"), read(t.path() / "out2" / "reports" / "report.json"));
  EXPECT_EQ(read(t.path() / "out" / "reports" / "report.txt"), report_text(r));

  std::string records = read(t.path() / "out" / "reports" / "verdicts.jsonl");
  EXPECT_EQ(std::count(records.begin(), records.end(), '\n'), 6);
  auto stats = stats_from_file((t.path() / "out" / "reports" / "verdicts.jsonl").string());
  ASSERT_EQ(stats.size(), 4u);
  EXPECT_EQ(stats[3].method, "wrong");
  EXPECT_DOUBLE_EQ(stats[3].counterexample_pct, 50.0);
}

TEST(EvalTest, MotivatingPairs) {
  TempDir t;
  EvalConfig cfg = small_config();
  EvalReport r = run_eval(fixture("motivating.jsonl"), fixture("schemas"), t.path().string(), cfg);
  ASSERT_EQ(r.pairs.size(), 9u);
  int found = 0;
  for (const auto& p : r.pairs) {
    EXPECT_TRUE(p.supported) << p.question_id << " " << p.parse_note;
    EXPECT_FALSE(p.ex) << p.question_id;
    if (p.verdict.kind != Verdict::Kind::NotEquivalent) continue;
    ++found;
    auto entries = load_dataset(fixture("motivating.jsonl"));
    auto e = std::find_if(entries.begin(), entries.end(),
                          [&](const BenchmarkEntry& b) { return b.question_id == p.question_id; });
    DatabaseSchema s = testing::fixture_schema(p.db_id);
    fs::path dump = t.path() / "counterexamples" / p.question_id / p.method / "db.json";
    EXPECT_EQ(replay(s, dump.string(), e->gold_sql, e->predictions.at(p.method)).ex, 0) << p.question_id;
  }
  EXPECT_GE(found, 7);
}

TEST(StatsTest, HandBuiltRecords) {
  std::vector<std::string> lines = {
      R"({"method": "a", "supported": true, "verdict": "not-equivalent", "validated": true, "seconds": 1.0})",
      R"({"method": "a", "supported": true, "verdict": "not-equivalent", "validated": true, "seconds": 4.0})",
      R"({"method": "a", "supported": true, "verdict": "not-equivalent", "validated": true, "seconds": 2.0})",
      R"({"method": "a", "supported": false, "verdict": "inconclusive", "validated": false, "seconds": 0})",
      R"({"method": "b", "supported": true, "verdict": "equivalent-up-to", "validated": false, "seconds": 9.0})",
      "",
  };
  auto rows = stats_from_records(lines);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].pairs, 4);
  EXPECT_DOUBLE_EQ(rows[0].supported_pct, 75.0);
  EXPECT_DOUBLE_EQ(rows[0].counterexample_pct, 75.0);
  EXPECT_NEAR(rows[0].mean_seconds, 7.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(rows[0].median_seconds, 2.0);
  EXPECT_DOUBLE_EQ(rows[1].counterexample_pct, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].median_seconds, 0.0);
  std::string text = stats_text(rows);
  EXPECT_NE(text.find("75.00"), std::string::npos) << text;
}

TEST(ReplayTest, AppendixDump) {
  DatabaseSchema s = testing::fixture_schema("thrombosis_prediction");
  auto p = testing::motivating_pairs()[0];
  ReplayResult r = replay(s, fixture("appendix_a1.db.json"), p.gold, p.gen);
  EXPECT_EQ(r.ex, 0);
  EXPECT_EQ(r.gold.size(), 1u);
  EXPECT_TRUE(r.gen.empty());
  std::string text = replay_text(r);
  EXPECT_NE(text.find("1000-01-01"), std::string::npos) << text;
  EXPECT_NE(text.find("EX=0"), std::string::npos);
}

TEST(ReplayTest, MissingTable) {
  TempDir t;
  DatabaseSchema s = testing::fixture_schema("thrombosis_prediction");
  write(t.path() / "db.json", R"({"tables": {"patient": []}})");
  try {
    replay(s, (t.path() / "db.json").string(), "SELECT id FROM patient", "SELECT id FROM patient");
    FAIL();
  } catch (const MalformedDump& e) {
    EXPECT_NE(std::string(e.what()).find("missing table"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace sqleq
