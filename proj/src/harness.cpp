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

#include "sqleq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sqleq/db_io.hpp"
#include "sqleq/engine.hpp"
#include "sqleq/evaluator.hpp"
#include "sqleq/parser.hpp"

namespace sqleq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string path_component(const std::string& s) {
  std::string out;
  for (char c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(const std::string& s, size_t w, bool right = false) {
  if (s.size() >= w) return s;
  std::string fill(w - s.size(), ' ');
  return right ? fill + s : s + fill;
}

struct Database {
  DatabaseSchema schema;
  std::optional<ConcreteDb> testdb;
};

}  // namespace

std::vector<BenchmarkEntry> load_dataset(const std::string& path) {
  std::string text = read_text(path);
  std::vector<BenchmarkEntry> out;
  std::set<std::string> ids;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IngestError(where + ": " + e.what());
    }
    auto field = [&](const char* name, bool required) -> std::string {
      if (!j.contains(name)) {
        if (required) throw IngestError(where + ": missing \"" + name + "\"");
        return "";
      }
      if (!j[name].is_string()) throw IngestError(where + ": \"" + name + "\" must be a string");
      return j[name].get<std::string>();
    };
    BenchmarkEntry e;
    e.question_id = field("question_id", true);
    e.db_id = field("db_id", true);
    e.question = field("question", false);
    e.gold_sql = field("gold", true);
    if (j.contains("predictions")) {
      if (!j["predictions"].is_object()) throw IngestError(where + ": \"predictions\" must be an object");
      for (const auto& [m, sql] : j["predictions"].items()) {
        if (!sql.is_string()) throw IngestError(where + ": prediction for " + m + " must be a string");
        e.predictions[m] = sql.get<std::string>();
      }
    }
    if (!ids.insert(e.question_id).second) throw IngestError(where + ": duplicate question_id " + e.question_id);
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

bool inconclusive(const PairRecord& p) {
  return p.verdict.kind == Verdict::Kind::Inconclusive && (p.verified || !p.supported);
}

}  // namespace

bool EvalReport::any_inconclusive() const {
  return std::any_of(pairs.begin(), pairs.end(), inconclusive);
}

std::string verdict_record(const PairRecord& p) {
  json j;
  j["question_id"] = p.question_id;
  j["method"] = p.method;
  j["db_id"] = p.db_id;
  j["supported"] = p.supported;
  if (!p.parse_note.empty()) j["parse_note"] = p.parse_note;
  j["ex"] = p.ex ? json(*p.ex) : json(nullptr);
  j["verified"] = p.verified;
  if (p.verified || !p.supported) {
    j["verdict"] = verdict_kind_name(p.verdict.kind);
    j["bound"] = p.verdict.bound;
    j["validated"] = p.verdict.validated;
    if (p.verdict.kind == Verdict::Kind::Inconclusive) {
      j["reason"] = inconclusive_reason_name(p.verdict.reason);
      j["detail"] = p.verdict.detail;
    }
    j["spurious"] = p.verdict.spurious;
  } else {
    j["verdict"] = "skipped";
  }
  j["cross_found"] = p.cross_found;
  if (!p.dump_hash.empty()) j["dump_hash"] = p.dump_hash;
  j["seconds"] = p.verdict.seconds;
  return j.dump();
}

namespace {

json report_pair(const PairRecord& p) {
  json j = json::parse(verdict_record(p));
  j.erase("seconds");
  return j;
}

}  // namespace

std::string report_json(const EvalReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods) {
    const MethodScore& s = m.score;
    methods.push_back({{"method", s.method},
                       {"questions", s.questions},
                       {"pairs", m.pairs},
                       {"supported", m.supported},
                       {"coverage_pct", m.pairs ? 100.0 * m.supported / m.pairs : 0.0},
                       {"counterexamples", m.counterexamples},
                       {"inconclusive", m.inconclusive},
                       {"ex_acc", s.ex_acc},
                       {"ex_rank", s.ex_rank},
                       {"verify_acc", s.verify_acc},
                       {"verify_rank", s.verify_rank},
                       {"verify_cc_acc", s.cc_acc},
                       {"verify_cc_rank", s.cc_rank}});
  }
  auto hist = [](const std::map<int, int>& h) {
    json o = json::object();
    for (const auto& [k, v] : h) o[std::to_string(k)] = v;
    return o;
  };
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back(report_pair(p));
  json doc = {{"methods", methods},
              {"verify_histogram", hist(r.verify_histogram)},
              {"verify_cc_histogram", hist(r.cc_histogram)},
              {"pairs", pairs}};
  return doc.dump(2) + "\n";
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  const std::vector<std::string> head = {"method", "pairs", "supported%", "EX%", "rank", "verify%", "rank",
                                         "verify+cc%", "rank", "cex", "inconclusive"};
  std::vector<std::vector<std::string>> rows = {head};
  for (const auto& m : r.methods) {
    const MethodScore& s = m.score;
    rows.push_back({s.method, std::to_string(m.pairs), fixed2(m.pairs ? 100.0 * m.supported / m.pairs : 0.0),
                    fixed2(s.ex_acc), std::to_string(s.ex_rank), fixed2(s.verify_acc), std::to_string(s.verify_rank),
                    fixed2(s.cc_acc), std::to_string(s.cc_rank), std::to_string(m.counterexamples),
                    std::to_string(m.inconclusive)});
  }
  std::vector<size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << "  ";
      os << pad(row[i], width[i], i > 0);
    }
    os << "\n";
  }
  auto hist = [&](const char* title, const std::map<int, int>& h) {
    os << "\n" << title << "\n";
    if (h.empty()) os << "  (none)\n";
    for (const auto& [k, v] : h) os << "  " << k << " method(s): " << v << " question(s)\n";
  };
  hist("questions passing EX but demoted by verification:", r.verify_histogram);
  hist("questions passing EX but demoted by verification + cross-checking:", r.cc_histogram);
  os << "\npairs:\n";
  for (const auto& p : r.pairs) {
    os << "  " << p.question_id << " / " << p.method << ": ex=" << (p.ex ? std::to_string(*p.ex) : "n/a") << ", ";
    if (!p.supported) {
      os << "unsupported (" << p.parse_note << ")";
    } else if (!p.verified) {
      os << "not verified";
    } else {
      os << describe(p.verdict);
    }
    if (p.cross_found > 0) os << ", +" << p.cross_found << " via cross-check";
    os << "\n";
  }
  return os.str();
}

EvalReport run_eval(const std::string& dataset_path, const std::string& schemas_dir, const std::string& out_dir,
                    const EvalConfig& cfg) {
  cfg.task.validate();
  std::vector<BenchmarkEntry> entries = load_dataset(dataset_path);
  std::map<std::string, Database> dbs;
  for (const auto& e : entries) {
    if (dbs.count(e.db_id)) continue;
    Database d;
    fs::path schema_path = fs::path(schemas_dir) / (e.db_id + ".json");
    try {
      d.schema = load_schema(read_text(schema_path));
    } catch (const SchemaError& err) {
      throw IngestError(schema_path.string() + ": " + err.what());
    }
    fs::path test_path = fs::path(schemas_dir) / (e.db_id + ".testdb.sql");
    if (fs::exists(test_path)) {
      try {
        d.testdb = load_insert_script(read_text(test_path), d.schema);
      } catch (const MalformedDump& err) {
        throw IngestError(test_path.string() + ": " + err.what());
      }
    }
    dbs.emplace(e.db_id, std::move(d));
  }

  EvalReport report;
  std::vector<QueryPair> queries;
  std::optional<std::string> engine;
  if (cfg.task.backend == Backend::ExternalEngine) engine = locate_sqlite();
  for (const auto& e : entries) {
    const Database& d = dbs.at(e.db_id);
    QueryPtr gold;
    std::string gold_note;
    try {
      gold = parse_sql(e.gold_sql, d.schema);
    } catch (const ParseError& err) {
      gold_note = std::string("gold: ") + parse_error_kind_name(err.kind()) + ": " + err.reason();
    }
    for (const auto& [method, sql] : e.predictions) {
      PairRecord p;
      p.question_id = e.question_id;
      p.method = method;
      p.db_id = e.db_id;
      QueryPair qp{gold, nullptr, e.gold_sql, sql};
      bool gen_syntax_error = false;
      try {
        qp.gen = parse_sql(sql, d.schema);
      } catch (const ParseError& err) {
        gen_syntax_error = err.kind() != ParseError::Kind::Unsupported;
        p.parse_note = std::string("generated: ") + parse_error_kind_name(err.kind()) + ": " + err.reason();
      }
      if (!gold_note.empty()) p.parse_note = gold_note;
      p.supported = gold && qp.gen;
      if (d.testdb) {
        if (p.supported) {
          ExOutcome o = ex_compare(*qp.gen, *qp.gold, *d.testdb);
          p.ex = o.ex;
        } else if (gen_syntax_error && gold) {
          p.ex = 0;
        } else if (engine) {
          p.ex = engine_ex(*engine, d.schema, qp, *d.testdb);
        }
      }
      if (!p.supported) {
        p.verdict.kind = Verdict::Kind::Inconclusive;
        p.verdict.reason = InconclusiveReason::Unsupported;
        p.verdict.detail = p.parse_note;
      }
      p.verified = p.supported && (!cfg.verify_only_ex_passes || !p.ex || *p.ex == 1);
      report.pairs.push_back(std::move(p));
      queries.push_back(std::move(qp));
    }
  }
  // Sort pairs and their queries together.
  std::vector<size_t> order(report.pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::tie(report.pairs[a].question_id, report.pairs[a].method) <
           std::tie(report.pairs[b].question_id, report.pairs[b].method);
  });
  {
    std::vector<PairRecord> p;
    std::vector<QueryPair> q;
    for (size_t i : order) {
      p.push_back(std::move(report.pairs[i]));
      q.push_back(std::move(queries[i]));
    }
    report.pairs = std::move(p);
    queries = std::move(q);
  }

  // Verification, one pair per worker at a time.
  VerdictCache cache;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t i = next++;
      if (i >= report.pairs.size()) return;
      PairRecord& p = report.pairs[i];
      if (!p.verified) continue;
      try {
        p.verdict = eqcheck(dbs.at(p.db_id).schema, queries[i], cfg.task, &cache);
      } catch (const std::exception& err) {
        p.verdict = Verdict{};
        p.verdict.kind = Verdict::Kind::Inconclusive;
        p.verdict.reason = InconclusiveReason::Unsupported;
        p.verdict.detail = std::string("internal error: ") + err.what();
      }
    }
  };
  int width = std::max(1, cfg.parallelism);
  std::vector<std::thread> pool;
  for (int t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<MethodResult> cc;
  for (size_t i = 0; i < report.pairs.size(); ++i) {
    PairRecord& p = report.pairs[i];
    const DatabaseSchema& schema = dbs.at(p.db_id).schema;
    if (p.verdict.kind == Verdict::Kind::NotEquivalent && p.verdict.db) {
      p.dump_hash = dump_hash(*p.verdict.db, schema);
    }
    MethodResult m;
    m.question_id = p.question_id;
    m.method = p.method;
    m.schema = &schema;
    m.pair = queries[i];
    m.eligible = p.verified;
    if (p.verdict.kind == Verdict::Kind::NotEquivalent && p.verdict.validated) m.own.push_back(*p.verdict.db);
    cc.push_back(std::move(m));
  }
  if (cfg.cross_check) cross_check(cc, cfg.task);

  // cc comes back sorted by (question_id, method), like report.pairs.
  std::vector<Outcome> outcomes;
  fs::path out(out_dir);
  for (size_t i = 0; i < report.pairs.size(); ++i) {
    PairRecord& p = report.pairs[i];
    const MethodResult& m = cc[i];
    const DatabaseSchema& schema = dbs.at(p.db_id).schema;
    p.cross_found = static_cast<int>(m.borrowed.size());
    Outcome o;
    o.question_id = p.question_id;
    o.method = p.method;
    if (p.ex) o.ex_pass = *p.ex == 1;
    o.verify_fail = p.verdict.kind == Verdict::Kind::NotEquivalent && p.verdict.validated;
    o.cc_fail = !o.verify_fail && !m.borrowed.empty();
    outcomes.push_back(o);
    fs::path dir = out / "counterexamples" / path_component(p.question_id) / path_component(p.method);
    if (o.verify_fail) {
      write_text(dir / "db.json", dump_json(*p.verdict.db, schema));
      write_text(dir / "insert.sql", insert_script(*p.verdict.db, schema));
    }
    for (const auto& db : m.borrowed) {
      fs::path sub = dir / ("cross-" + dump_hash(db, schema));
      write_text(sub / "db.json", dump_json(db, schema));
      write_text(sub / "insert.sql", insert_script(db, schema));
    }
    if (cfg.task.emit_smtlib && !p.verdict.smtlib.empty()) write_text(dir / "formula.smt2", p.verdict.smtlib);
  }

  ScoreTable table = score(outcomes);
  report.verify_histogram = table.verify_histogram;
  report.cc_histogram = table.cc_histogram;
  for (const auto& s : table.methods) {
    MethodRow row;
    row.score = s;
    for (const auto& p : report.pairs) {
      if (p.method != s.method) continue;
      ++row.pairs;
      row.supported += p.supported;
      row.counterexamples += p.verdict.kind == Verdict::Kind::NotEquivalent && p.verdict.validated;
      row.inconclusive += inconclusive(p);
    }
    report.methods.push_back(row);
  }

  write_text(out / "reports" / "report.txt", report_text(report));
  write_text(out / "reports" / "report.json", report_json(report));
  std::string records;
  std::vector<std::string> lines;
  for (const auto& p : report.pairs) {
    lines.push_back(verdict_record(p));
    records += lines.back() + "\n";
  }
  write_text(out / "reports" / "verdicts.jsonl", records);
  write_text(out / "reports" / "stats.txt", stats_text(stats_from_records(lines)));
  return report;
}

std::vector<StatsRow> stats_from_records(const std::vector<std::string>& jsonl_lines) {
  struct Acc {
    int pairs = 0, supported = 0, cex = 0;
    std::vector<double> times;
  };
  std::map<std::string, Acc> acc;
  for (const auto& line : jsonl_lines) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line);
    Acc& a = acc[j.value("method", std::string())];
    ++a.pairs;
    a.supported += j.value("supported", false);
    if (j.value("verdict", std::string()) == "not-equivalent" && j.value("validated", false)) {
      ++a.cex;
      a.times.push_back(j.value("seconds", 0.0));
    }
  }
  std::vector<StatsRow> out;
  for (auto& [method, a] : acc) {
    StatsRow r;
    r.method = method;
    r.pairs = a.pairs;
    r.supported_pct = a.pairs ? 100.0 * a.supported / a.pairs : 0.0;
    r.counterexample_pct = a.pairs ? 100.0 * a.cex / a.pairs : 0.0;
    if (!a.times.empty()) {
      double sum = 0;
      for (double t : a.times) sum += t;
      r.mean_seconds = sum / a.times.size();
      std::sort(a.times.begin(), a.times.end());
      size_t n = a.times.size();
      r.median_seconds = n % 2 ? a.times[n / 2] : (a.times[n / 2 - 1] + a.times[n / 2]) / 2;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<StatsRow> stats_from_file(const std::string& verdicts_path) {
  std::stringstream ss(read_text(verdicts_path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return stats_from_records(lines);
}

std::string stats_text(const std::vector<StatsRow>& rows) {
  std::ostringstream os;
  os << pad("method", 16) << pad("pairs", 7, true) << pad("supported%", 12, true) << pad("cex%", 9, true)
     << pad("mean-s", 10, true) << pad("median-s", 10, true) << "\n";
  for (const auto& r : rows) {
    os << pad(r.method, 16) << pad(std::to_string(r.pairs), 7, true) << pad(fixed2(r.supported_pct), 12, true)
       << pad(fixed2(r.counterexample_pct), 9, true) << pad(fixed2(r.mean_seconds), 10, true)
       << pad(fixed2(r.median_seconds), 10, true) << "\n";
  }
  return os.str();
}

ReplayResult replay(const DatabaseSchema& schema, const std::string& dump_path, const std::string& gold_sql,
                    const std::string& gen_sql) {
  ConcreteDb db = load_dump_file(dump_path, schema);
  QueryPtr gold = parse_sql(gold_sql, schema);
  QueryPtr gen = parse_sql(gen_sql, schema);
  ExOutcome o = ex_compare(*gold, *gen, db);
  ReplayResult r;
  r.ex = o.ex;
  r.diagnostic = o.diagnostic;
  r.gold = std::move(o.r1);
  r.gen = std::move(o.r2);
  r.gold_columns = gold->columns;
  r.gen_columns = gen->columns;
  return r;
}

std::string replay_text(const ReplayResult& r) {
  std::ostringstream os;
  os << "gold (" << r.gold.size() << " row(s)):\n" << format_relation(r.gold, r.gold_columns);
  os << "generated (" << r.gen.size() << " row(s)):\n" << format_relation(r.gen, r.gen_columns);
  if (!r.diagnostic.empty()) os << "error: " << r.diagnostic << "\n";
  os << "EX=" << r.ex << "\n";
  return os.str();
}

}  // namespace sqleq
