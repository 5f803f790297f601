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

// Batch evaluation of Text-to-SQL predictions.
//
// Dataset: one JSON object per line,
//   {"question_id": "q1", "db_id": "club", "question": "...",
//    "gold": "SELECT ...", "predictions": {"method": "SELECT ..."}}
// Schemas live in <schemas>/<db_id>.json; an optional static test database
// is read from <schemas>/<db_id>.testdb.sql (INSERT script).
//
// Artifacts under the output directory:
//   reports/report.txt, reports/report.json   deterministic summaries
//   reports/verdicts.jsonl                     one record per pair, with timings
//   reports/stats.txt                          coverage and timing table
//   counterexamples/<question_id>/<method>/{db.json,insert.sql}
//   counterexamples/<question_id>/<method>/cross-<hash>/{db.json,insert.sql}

#ifndef SQLEQ_HARNESS_HPP_
#define SQLEQ_HARNESS_HPP_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqleq/pipeline.hpp"
#include "sqleq/schema.hpp"

namespace sqleq {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchmarkEntry {
  std::string question_id;
  std::string db_id;
  std::string question;
  std::string gold_sql;
  std::map<std::string, std::string> predictions;
};

std::vector<BenchmarkEntry> load_dataset(const std::string& path);

struct EvalConfig {
  TaskConfig task;
  int parallelism = 1;
  bool cross_check = true;
  bool verify_only_ex_passes = true;
};

// One (question, method) cell.
struct PairRecord {
  std::string question_id;
  std::string method;
  std::string db_id;
  bool supported = false;   // both queries parse into the supported subset
  std::string parse_note;   // first parse problem, when not supported
  std::optional<int> ex;    // EX on the static database, when one exists
  bool verified = false;    // eqcheck ran
  Verdict verdict;
  int cross_found = 0;      // counterexamples gained by cross-checking
  std::string dump_hash;    // of the eqcheck counterexample
};

struct MethodRow {
  MethodScore score;
  int pairs = 0;
  int supported = 0;
  int counterexamples = 0;  // pairs with a validated counterexample (own)
  int inconclusive = 0;
};

struct EvalReport {
  std::vector<PairRecord> pairs;  // sorted by (question_id, method)
  std::vector<MethodRow> methods;
  std::map<int, int> verify_histogram;
  std::map<int, int> cc_histogram;

  bool any_inconclusive() const;
};

// Runs the whole batch and writes the artifacts. Throws IngestError.
EvalReport run_eval(const std::string& dataset_path, const std::string& schemas_dir, const std::string& out_dir,
                    const EvalConfig& cfg);

// Deterministic renderings (no timings).
std::string report_text(const EvalReport& r);
std::string report_json(const EvalReport& r);
std::string verdict_record(const PairRecord& p);  // one JSON line, with seconds

struct StatsRow {
  std::string method;
  int pairs = 0;
  double supported_pct = 0;
  double counterexample_pct = 0;
  double mean_seconds = 0;    // over validated counterexamples
  double median_seconds = 0;
};

// From verdict records (as written to verdicts.jsonl).
std::vector<StatsRow> stats_from_records(const std::vector<std::string>& jsonl_lines);
std::vector<StatsRow> stats_from_file(const std::string& verdicts_path);
std::string stats_text(const std::vector<StatsRow>& rows);

struct ReplayResult {
  int ex = 0;
  std::string diagnostic;
  Relation gold, gen;
  std::vector<OutColumn> gold_columns, gen_columns;
};

// Evaluates both queries on a dump. Throws MalformedDump or ParseError.
ReplayResult replay(const DatabaseSchema& schema, const std::string& dump_path, const std::string& gold_sql,
                    const std::string& gen_sql);
std::string replay_text(const ReplayResult& r);

}  // namespace sqleq

#endif  // SQLEQ_HARNESS_HPP_
