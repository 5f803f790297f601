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

// sqleq: bounded SQL equivalence checking and Text-to-SQL evaluation.
//
//   sqleq eval   --dataset D --schemas DIR --out DIR [options]
//   sqleq check  --schema S --gold SQL --gen SQL [options]
//   sqleq replay --schema S --dump DB.json --gold SQL --gen SQL
//   sqleq stats  --verdicts reports/verdicts.jsonl
//   sqleq scan   --schema S --sql SQL
//
// Exit codes: 0 ok, 1 partial (some verdict inconclusive), 2 fatal.

#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "sqleq/db_io.hpp"
#include "sqleq/harness.hpp"
#include "sqleq/parser.hpp"
#include "sqleq/pipeline.hpp"

namespace {

struct Common {
  int bound = 5;
  double timeout = 600;
  bool exclude_degenerate = true;
  std::string backend = "reference";
  std::string emit_smtlib;

  void add(CLI::App* app, bool with_smtlib_path) {
    app->add_option("--bound", bound, "Maximum tuples per table")->default_val(5)->check(CLI::PositiveNumber);
    app->add_option("--timeout-secs", timeout, "Wall-clock budget per pair")->default_val(600)->check(
        CLI::PositiveNumber);
    app->add_option("--exclude-degenerate", exclude_degenerate, "Skip empty-vs-NULL witnesses (true/false)")
        ->default_val(true);
    app->add_option("--validation-backend", backend, "reference or sqlite")
        ->default_val("reference")
        ->check(CLI::IsMember({"reference", "sqlite"}));
    if (with_smtlib_path) {
      app->add_option("--emit-smtlib", emit_smtlib, "Write the last SMT-LIB2 formula to this file");
    } else {
      app->add_flag("--emit-smtlib", "Write formula.smt2 next to each pair's artifacts");
    }
  }

  sqleq::TaskConfig task() const {
    sqleq::TaskConfig cfg;
    cfg.max_bound = bound;
    cfg.budget.cpu_seconds = timeout;
    cfg.exclude_degenerate = exclude_degenerate;
    cfg.backend = backend == "sqlite" ? sqleq::Backend::ExternalEngine : sqleq::Backend::Reference;
    return cfg;
  }
};

sqleq::DatabaseSchema schema_from(const std::string& path) { return sqleq::load_schema_file(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded SQL equivalence checking for Text-to-SQL evaluation"};
  app.require_subcommand(1);

  Common eval_opts;
  std::string dataset, schemas, out_dir = "sqleq-out";
  int parallelism = 1;
  bool cross = true, only_ex = true;
  auto* eval = app.add_subcommand("eval", "Evaluate a dataset of predictions");
  eval->add_option("--dataset", dataset, "JSONL benchmark file")->required();
  eval->add_option("--schemas", schemas, "Directory with <db_id>.json schemas")->required();
  eval->add_option("--out", out_dir, "Artifact directory")->default_val("sqleq-out");
  eval->add_option("--parallelism", parallelism, "Worker threads")->default_val(1)->check(CLI::PositiveNumber);
  eval->add_option("--cross-check", cross, "Reuse counterexamples across methods (true/false)")->default_val(true);
  eval->add_option("--verify-only-ex-passes", only_ex, "Verify only predictions passing EX (true/false)")
      ->default_val(true);
  eval_opts.add(eval, false);

  Common check_opts;
  std::string schema_path, gold, gen;
  auto* check = app.add_subcommand("check", "Check one query pair");
  check->add_option("--schema", schema_path, "Schema JSON")->required();
  check->add_option("--gold", gold, "Gold SQL")->required();
  check->add_option("--gen", gen, "Generated SQL")->required();
  check_opts.add(check, true);

  std::string dump_path;
  auto* rep = app.add_subcommand("replay", "Evaluate both queries on a counterexample dump");
  rep->add_option("--schema", schema_path, "Schema JSON")->required();
  rep->add_option("--dump", dump_path, "db.json dump")->required();
  rep->add_option("--gold", gold, "Gold SQL")->required();
  rep->add_option("--gen", gen, "Generated SQL")->required();

  std::string verdicts;
  auto* st = app.add_subcommand("stats", "Coverage and timing from a verdict stream");
  st->add_option("--verdicts", verdicts, "verdicts.jsonl")->required();

  std::string sql;
  auto* scan = app.add_subcommand("scan", "List constructs outside the supported subset");
  scan->add_option("--schema", schema_path, "Schema JSON")->required();
  scan->add_option("--sql", sql, "Query text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*eval) {
      sqleq::EvalConfig cfg;
      cfg.task = eval_opts.task();
      cfg.task.emit_smtlib = eval->count("--emit-smtlib") > 0;
      cfg.parallelism = parallelism;
      cfg.cross_check = cross;
      cfg.verify_only_ex_passes = only_ex;
      sqleq::EvalReport r = sqleq::run_eval(dataset, schemas, out_dir, cfg);
      std::cout << sqleq::report_text(r);
      return r.any_inconclusive() ? 1 : 0;
    }
    if (*check) {
      sqleq::DatabaseSchema schema = schema_from(schema_path);
      sqleq::TaskConfig cfg = check_opts.task();
      cfg.emit_smtlib = !check_opts.emit_smtlib.empty();
      sqleq::QueryPair pair;
      pair.gold_sql = gold;
      pair.gen_sql = gen;
      try {
        pair.gold = sqleq::parse_sql(gold, schema);
        pair.gen = sqleq::parse_sql(gen, schema);
      } catch (const sqleq::ParseError& e) {
        if (e.kind() != sqleq::ParseError::Kind::Unsupported) throw;
        std::cout << "inconclusive: unsupported (" << e.reason() << ")\n";
        return 1;
      }
      sqleq::Verdict v = sqleq::eqcheck(schema, pair, cfg);
      std::cout << sqleq::describe(v) << "\n";
      if (v.db) {
        std::cout << "-- counterexample\n" << sqleq::insert_script(*v.db, schema, false);
      }
      if (cfg.emit_smtlib) {
        std::ofstream out(check_opts.emit_smtlib);
        out << v.smtlib;
      }
      return v.kind == sqleq::Verdict::Kind::Inconclusive ? 1 : 0;
    }
    if (*rep) {
      sqleq::DatabaseSchema schema = schema_from(schema_path);
      std::cout << sqleq::replay_text(sqleq::replay(schema, dump_path, gold, gen));
      return 0;
    }
    if (*st) {
      std::cout << sqleq::stats_text(sqleq::stats_from_file(verdicts));
      return 0;
    }
    if (*scan) {
      sqleq::DatabaseSchema schema = schema_from(schema_path);
      sqleq::SupportReport r = sqleq::scan_sql(sql, schema);
      if (r.supported()) {
        std::cout << "supported\n";
        return 0;
      }
      for (const auto& u : r.unsupported) std::cout << "unsupported: " << u << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
