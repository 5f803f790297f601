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


// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Exit status is 0 when every FAIL is listed in kKnownGaps with the exact
// shortfall recorded there; any other failure exits 1.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "differential.hpp"
#include "sqleq/db_io.hpp"
#include "sqleq/engine.hpp"
#include "sqleq/evaluator.hpp"
#include "sqleq/harness.hpp"
#include "sqleq/oracle.hpp"
#include "sqleq/parser.hpp"
#include "sqleq/pipeline.hpp"
#include "sqleq/scalar.hpp"
#include "test_util.hpp"

namespace {

using namespace sqleq;
using testing::fixture;
using testing::fixture_schema;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

struct Result {
  bool pass = false;
  std::string detail;
};

QueryPair make_pair(const DatabaseSchema& s, const std::string& gold, const std::string& gen) {
  return QueryPair{parse_sql(gold, s), parse_sql(gen, s), gold, gen};
}

// Calendar validity from std::chrono, independent of the library.
bool chrono_valid(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                     std::chrono::day{static_cast<unsigned>(d)}}
      .ok();
}

// Julian day via the Unix epoch (JD 2440587.5).
Rational chrono_jd(int y, int m, int d) {
  auto days = std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(m)} /
                                    std::chrono::day{static_cast<unsigned>(d)}};
  return Rational(days.time_since_epoch().count()) + Rational(4881175, 2);
}

TaskConfig default_config() {
  TaskConfig cfg;
  cfg.max_bound = 5;
  cfg.budget.cpu_seconds = 600;
  return cfg;
}

// ---------------------------------------------------------------------------

Result ac1() {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::example3_pair();
  auto t0 = Clock::now();
  Verdict v = eqcheck(s, make_pair(s, p.gold, p.gen), default_config());
  double secs = since(t0);
  Result r;
  r.detail = describe(v) + ", " + fmt(secs) + " s";
  if (v.kind != Verdict::Kind::NotEquivalent || !v.validated || v.bound != 1 || !v.db) return r;
  const Relation& rel = v.db->table("r");
  r.detail += ", R = " + (rel.size() == 1 ? rel.rows[0][0].to_string() : std::to_string(rel.size()) + " rows");
  r.pass = rel.size() == 1 && rel.rows[0][0] == Value::integer(2) && secs < 5;
  return r;
}

struct PairRun {
  std::string id;
  Verdict verdict;
  bool reference = false, engine = false;
};

std::vector<PairRun> g_motivating;  // reused by AC8

Result ac2() {
  auto exe = locate_sqlite();
  std::vector<double> times;
  std::vector<std::string> missing;
  int found = 0;
  for (const auto& p : testing::motivating_pairs()) {
    DatabaseSchema s = fixture_schema(p.db_id);
    QueryPair q = make_pair(s, p.gold, p.gen);
    PairRun run{p.id, eqcheck(s, q, default_config())};
    std::cout << "  " << p.id << ": " << describe(run.verdict) << " (" << fmt(run.verdict.seconds) << " s)";
    if (run.verdict.kind == Verdict::Kind::NotEquivalent && run.verdict.db) {
      run.reference = ex_metric(*q.gold, *q.gen, *run.verdict.db) == 0;
      run.engine = !exe || engine_ex(*exe, s, q, *run.verdict.db) == 0;
      std::cout << " reference EX=" << (run.reference ? 0 : 1)
                << (exe ? std::string(" sqlite EX=") + (run.engine ? "0" : "1") : " sqlite n/a");
    }
    std::cout << "\n";
    if (run.reference && run.engine) {
      ++found;
      times.push_back(run.verdict.seconds);
    } else {
      missing.push_back(p.id);
    }
    g_motivating.push_back(std::move(run));
  }
  std::sort(times.begin(), times.end());
  double median = 0;
  if (!times.empty()) {
    size_t n = times.size();
    median = n % 2 ? times[n / 2] : (times[n / 2 - 1] + times[n / 2]) / 2;
  }
  Result r;
  r.detail = std::to_string(found) + "/" + std::to_string(g_motivating.size()) + " validated, median " +
             fmt(median) + " s" + (exe ? ", SQLite checked" : ", no SQLite executable");
  if (!missing.empty()) {
    r.detail += "; missing:";
    for (const auto& m : missing) r.detail += " " + m;
  }
  r.pass = missing.empty() && median < 10;
  return r;
}

Result ac3() {
  DatabaseSchema s = fixture_schema("thrombosis_prediction");
  auto p = testing::motivating_pairs()[0];
  ReplayResult rr = replay(s, fixture("appendix_a1.db.json"), p.gold, p.gen);
  Result r;
  r.detail = "gold " + std::to_string(rr.gold.size()) + " row(s)";
  if (rr.gold.size() == 1) r.detail += " [" + rr.gold.rows[0][0].to_string() + "]";
  r.detail += ", generated " + std::to_string(rr.gen.size()) + " row(s), EX=" + std::to_string(rr.ex);
  r.pass = rr.gold.size() == 1 && rr.gold.rows[0].size() == 1 && rr.gold.rows[0][0] == Value::date(1000, 1, 1) &&
           rr.gen.empty() && rr.ex == 0;
  return r;
}

Result ac4() {
  testing::DiffStats st = testing::expression_differential(1000, 20260101);
  // Each construct must appear in some matching case.
  const std::vector<std::pair<std::string, std::string>> constructs = {
      {"CAST text->int", "AS TEXT) AS INTEGER"}, {"CAST str->int", "' AS INTEGER)"},
      {"CAST date->int", "CAST(d AS INTEGER)"},   {"CAST int->text", "CAST(a AS TEXT)"},
      {"CAST date->text", "CAST(d AS TEXT)"},     {"DATE(str)", "DATE(s)"},
      {"DATE(int)", "DATE(a)"},                   {"SUBSTR", "SUBSTR("},
      {"STRFTIME", "STRFTIME("},                  {"JULIANDAY", "JULIANDAY("},
      {"LIKE", " LIKE '_'"},                      {"prefix", " LIKE 'a%'"},
      {"suffix", " LIKE '%c'"},                   {"NULL", "NULL"},
  };
  std::vector<std::string> absent;
  for (const auto& [name, marker] : constructs) {
    bool seen = std::any_of(st.passed.begin(), st.passed.end(),
                            [&](const std::string& sql) { return sql.find(marker) != std::string::npos; });
    if (!seen) absent.push_back(name);
  }
  Result r;
  r.detail = std::to_string(st.cases) + " cases, " + std::to_string(st.failures.size()) + " mismatches, " +
             std::to_string(st.skipped) + " evaluator errors skipped";
  if (!absent.empty()) {
    r.detail += "; not covered:";
    for (const auto& a : absent) r.detail += " " + a;
  }
  for (size_t i = 0; i < st.failures.size() && i < 3; ++i) std::cout << "  mismatch: " << st.failures[i] << "\n";
  r.pass = st.cases >= 1000 && st.failures.empty() && absent.empty();
  return r;
}

// Random predicate over r with an equivalent rewriting.
class PredGen {
 public:
  explicit PredGen(std::mt19937& rng) : rng_(rng) {}

  std::pair<std::string, std::string> pred(int depth, const std::string& p = "") {
    if (depth > 0 && coin(0.4)) {
      auto a = pred(depth - 1, p), b = pred(depth - 1, p);
      switch (pick(3)) {
        case 0:
          return {"(" + a.first + " AND " + b.first + ")", "(" + b.second + " AND " + a.second + ")"};
        case 1:
          return {"(" + a.first + " OR " + b.first + ")", "(" + b.second + " OR " + a.second + ")"};
        default:
          return {"NOT (" + a.first + ")", "NOT (" + a.second + ")"};
      }
    }
    int c = static_cast<int>(pick(4));
    std::string cs = std::to_string(c), id = p + "id", dob = p + "dob";
    switch (pick(12)) {
      case 0:
        return {id + " > " + cs, id + " >= " + std::to_string(c + 1)};
      case 1:
        return {id + " >= " + cs, "NOT " + id + " < " + cs};
      case 2:
        return {id + " = " + cs, id + " IN (" + cs + ")"};
      case 3:
        return {id + " <> " + cs, "NOT " + id + " = " + cs};
      case 4:
        return {id + " IS NULL", "NOT " + id + " IS NOT NULL"};
      case 5:
        return {id + " IS NOT NULL", id + " = " + id};
      case 6:
        return {id + " BETWEEN " + cs + " AND " + std::to_string(c + 1),
                "(" + id + " >= " + cs + " AND " + id + " <= " + std::to_string(c + 1) + ")"};
      case 7:
        return {dob + " > '2000-06-01'", dob + " >= '2000-06-02'"};
      case 8:
        return {"JULIANDAY(" + dob + ") > 2451545", dob + " > '2000-01-01'"};
      case 9:
        return {id + " + 1 > " + cs, id + " > " + std::to_string(c - 1)};
      case 10:
        return {"COALESCE(" + id + ", 0) = " + cs,
                c == 0 ? "(" + id + " = 0 OR " + id + " IS NULL)" : id + " = " + cs};
      default:
        return {"CAST(" + id + " AS TEXT) LIKE '1%'", "SUBSTR(CAST(" + id + " AS TEXT), 1, 1) = '1'"};
    }
  }

  size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

 private:
  std::mt19937& rng_;
};

// Query shapes; shapes in the same group have the same output type.
struct Shape {
  const char* sql;  // {P} is replaced by the predicate
  int group;
  const char* prefix;
};

const std::vector<Shape> kShapes = {
    {"SELECT id FROM r WHERE {P}", 0, ""},
    {"SELECT DISTINCT id FROM r WHERE {P}", 0, ""},
    {"SELECT id FROM r WHERE {P} ORDER BY id DESC LIMIT 1", 0, ""},
    {"SELECT id FROM r WHERE {P} EXCEPT SELECT id FROM r WHERE id = 1", 0, ""},
    {"SELECT COUNT(*) FROM r WHERE {P}", 1, ""},
    {"SELECT MAX(id) FROM r WHERE {P}", 1, ""},
    {"SELECT SUM(id) FROM r WHERE {P}", 1, ""},
    {"SELECT COUNT(DISTINCT id) FROM r WHERE {P}", 1, ""},
    {"SELECT id, COUNT(*) FROM r WHERE {P} GROUP BY id", 2, ""},
    {"SELECT dob FROM r WHERE {P}", 3, ""},
    {"SELECT a.id FROM r AS a JOIN r AS b ON a.id = b.id WHERE {P}", 4, "a."},
};

std::string instantiate(const Shape& s, const std::string& p) {
  std::string out = s.sql;
  out.replace(out.find("{P}"), 3, p);
  return out;
}

Result ac5() {
  DatabaseSchema s = fixture_schema("r");
  DomainSpec spec;
  spec.ints = {0, 1, 2};
  spec.dates = {Date{1999, 12, 31}, Date{2000, 1, 1}, Date{2000, 6, 1}, Date{2000, 6, 2}};
  TaskConfig cfg;
  cfg.domain = to_pools(spec);
  std::mt19937 rng(7);
  PredGen gen(rng);
  int pairs = 0, checks = 0, mismatches = 0, unvalidated = 0, inconclusive = 0;
  int equiv = 0, nonequiv = 0;
  while (pairs < 200) {
    const Shape& a = kShapes[gen.pick(kShapes.size())];
    std::vector<const Shape*> mates;
    for (const auto& b : kShapes) {
      if (b.group == a.group && std::string(b.prefix) == a.prefix) mates.push_back(&b);
    }
    const Shape& b = gen.coin(0.7) ? a : *mates[gen.pick(mates.size())];
    auto p = gen.pred(2, a.prefix);
    std::string other = gen.coin(0.5) ? p.second : gen.pred(2, b.prefix).first;
    std::string sql1 = instantiate(a, p.first), sql2 = instantiate(b, other);
    QueryPtr q1 = parse_sql(sql1, s), q2 = parse_sql(sql2, s);
    ++pairs;
    for (int k = 1; k <= 2; ++k) {
      spec.k = k;
      ++checks;
      OracleVerdict o = oracle_check(s, *q1, *q2, spec);
      BoundCheck c = check_bounded(s, *q1, *q2, k, SolveBudget{120}, cfg);
      (o.equivalent ? equiv : nonequiv)++;
      if (c.kind == BoundCheck::Kind::Inconclusive) {
        ++inconclusive;
        std::cout << "  inconclusive k=" << k << ": " << sql1 << " | " << sql2 << ": " << c.detail << "\n";
        continue;
      }
      if (o.equivalent != (c.kind == BoundCheck::Kind::Equivalent)) {
        ++mismatches;
        std::cout << "  mismatch k=" << k << ": " << sql1 << " | " << sql2 << " oracle "
                  << (o.equivalent ? "equivalent" : "differs") << "\n";
      }
      if (c.db && ex_metric(*q1, *q2, *c.db) != 0) {
        ++unvalidated;
        std::cout << "  unvalidated k=" << k << ": " << sql1 << " | " << sql2 << "\n";
      }
    }
  }
  Result r;
  r.detail = std::to_string(pairs) + " pairs, " + std::to_string(checks) + " bounded checks (" +
             std::to_string(equiv) + " equivalent, " + std::to_string(nonequiv) + " not), " +
             std::to_string(mismatches) + " mismatches, " + std::to_string(inconclusive) + " inconclusive, " +
             std::to_string(unvalidated) + " unvalidated counterexamples";
  r.pass = pairs >= 200 && mismatches == 0 && inconclusive == 0 && unvalidated == 0;
  return r;
}

// JULIANDAY of a date literal, through the encoder.
std::optional<Rational> encoded_jd(const DatabaseSchema& s, const Date& d) {
  z3::context ctx;
  Encoder enc(ctx);
  SymDb db = enc.alloc_symbolic_db(s, 1);
  QueryPtr q = parse_sql("SELECT JULIANDAY(DATE('" + format_date(d) + "')) FROM r", s);
  SymValue v = enc.encode_expr(db.tables.at("r").tuples[0], *q->as<ast::Project>()->exprs[0]);
  z3::expr e = v.num.simplify();
  int64_t num = 0, den = 1;
  if (!v.null.simplify().is_false() || !e.is_numeral() ||
      !Z3_get_numeral_int64(ctx, Z3_get_numerator(ctx, e), &num) ||
      !Z3_get_numeral_int64(ctx, Z3_get_denominator(ctx, e), &den)) {
    return std::nullopt;
  }
  return Rational(num, den);
}

Result ac6() {
  DatabaseSchema s = fixture_schema("r");
  const Rational want(4903089, 2);  // 2451544.5
  Rational eval = julian_day(Date{2000, 1, 1});
  auto enc = encoded_jd(s, Date{2000, 1, 1});
  int days = 0, steps_bad = 0, encoder_bad = 0;
  for (auto [lo, hi] : {std::pair{1896, 1904}, std::pair{1999, 2001}}) {
    Rational prev = julian_day(Date{lo - 1, 12, 31});
    for (int y = lo; y <= hi; ++y) {
      for (int m = 1; m <= 12; ++m) {
        for (int d = 1; chrono_valid(y, m, d); ++d) {
          Rational cur = julian_day(Date{y, m, d});
          if (cur - prev != Rational(1) || cur != chrono_jd(y, m, d)) ++steps_bad;
          prev = cur;
          ++days;
          // The encoder is checked on the first of each month and the span ends.
          if (d == 1 || (y == hi && m == 12 && d == 31)) {
            auto e = encoded_jd(s, Date{y, m, d});
            if (!e || *e != cur) ++encoder_bad;
          }
        }
      }
    }
  }
  Result r;
  r.detail = "evaluator " + eval.to_string() + ", encoder " + (enc ? enc->to_string() : "n/a") +
             ", " + std::to_string(days) + " days stepped, " + std::to_string(steps_bad) + " bad steps, " +
             std::to_string(encoder_bad) + " encoder disagreements";
  r.pass = eval == want && enc && *enc == want && steps_bad == 0 && encoder_bad == 0;
  return r;
}

Result ac7() {
  z3::context ctx;
  Encoder enc(ctx);
  int valid = 0, oracle = 0, wrong_eval = 0, wrong_enc = 0;
  for (int y = 1896; y <= 1904; ++y) {
    for (int m = 0; m <= 13; ++m) {
      for (int d = 0; d <= 32; ++d) {
        bool want = chrono_valid(y, m, d);
        oracle += want;
        Value v = int_to_date(Value::integer(int64_t{y} * 10000 + m * 100 + d));
        bool got = !v.is_null();
        valid += got;
        if (got != want || (got && v != Value::date(y, m, d))) ++wrong_eval;
        z3::expr c = enc.date_valid(ctx.int_val(y), ctx.int_val(m), ctx.int_val(d)).simplify();
        if (!(want ? c.is_true() : c.is_false())) ++wrong_enc;
      }
    }
  }
  Result r;
  r.detail = std::to_string(valid) + " accepted, calendar oracle " + std::to_string(oracle) + ", " +
             std::to_string(wrong_eval) + " evaluator and " + std::to_string(wrong_enc) + " encoder disagreements";
  r.pass = valid == 3287 && oracle == 3287 && wrong_eval == 0 && wrong_enc == 0;
  return r;
}

Result ac8() {
  struct Case {
    std::string id, db_id, gold, gen;
    bool exclude_degenerate = true;
    std::optional<Verdict> verdict;
  };
  std::vector<Case> cases;
  auto mot = testing::motivating_pairs();
  for (size_t i = 0; i < mot.size(); ++i) {
    Case c{mot[i].id, mot[i].db_id, mot[i].gold, mot[i].gen};
    if (i < g_motivating.size()) c.verdict = g_motivating[i].verdict;
    cases.push_back(c);
  }
  auto e3 = testing::example3_pair();
  cases.push_back({e3.id, e3.db_id, e3.gold, e3.gen});
  auto dg = testing::degenerate_pair();
  cases.push_back({dg.id, dg.db_id, dg.gold, dg.gen, false});
  for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{
           {"SELECT COUNT(*) FROM r", "SELECT COUNT(id) FROM r"},
           {"SELECT COUNT(DISTINCT id) FROM r", "SELECT COUNT(id) FROM r"},
           {"SELECT a.id FROM r AS a JOIN r AS b ON a.id < b.id", "SELECT id FROM r WHERE id IS NOT NULL"},
           {"SELECT id FROM r UNION SELECT id + 1 FROM r", "SELECT id FROM r"},
           {"SELECT id FROM r WHERE id IN (1, 2, 3) AND NOT id BETWEEN 2 AND 3", "SELECT id FROM r WHERE id = 1"},
       }) {
    cases.push_back({"r", "r", a, b});
  }
  int checked = 0, violations = 0;
  const int cap = 3;
  for (auto& c : cases) {
    DatabaseSchema s = fixture_schema(c.db_id);
    QueryPair q = make_pair(s, c.gold, c.gen);
    TaskConfig cfg = default_config();
    cfg.exclude_degenerate = c.exclude_degenerate;
    if (!c.verdict) {
      cfg.max_bound = cap;
      c.verdict = eqcheck(s, q, cfg);
    }
    const Verdict& v = *c.verdict;
    if (v.kind != Verdict::Kind::NotEquivalent) continue;  // EquivalentUpTo already covers every k <= K
    ++checked;
    for (int k = 1; k <= std::min(v.bound + 1, std::max(v.bound, cap)); ++k) {
      BoundCheck b = check_bounded(s, *q.gold, *q.gen, k, SolveBudget{300}, cfg);
      auto want = k < v.bound ? BoundCheck::Kind::Equivalent : BoundCheck::Kind::NotEquivalent;
      if (b.kind != want) {
        ++violations;
        std::cout << "  " << c.id << " k=" << k << ": expected "
                  << (want == BoundCheck::Kind::Equivalent ? "equivalent" : "not equivalent") << ", got "
                  << (b.kind == BoundCheck::Kind::Inconclusive ? "inconclusive (" + b.detail + ")"
                                                                : b.kind == BoundCheck::Kind::Equivalent
                                                                      ? "equivalent"
                                                                      : "not equivalent")
                  << "\n";
      }
    }
  }
  Result r;
  r.detail = std::to_string(checked) + " counterexample verdicts re-checked at every bound up to the witness bound + 1, " +
             std::to_string(violations) + " violations";
  r.pass = checked > 0 && violations == 0;
  return r;
}

Result ac9() {
  // Hand-assigned outcomes:
  //   q1: a passes everything; b fails EX.
  //   q2: a demoted by verification; b passes.
  //   q3: a passes; b demoted only by cross-checking.
  // a: EX 3/3, verify 2/3, verify+cc 2/3
  // b: EX 2/3, verify 2/3, verify+cc 1/3
  std::vector<Outcome> os = {
      {"q1", "a", true, false, false}, {"q1", "b", false, false, false}, {"q2", "a", true, true, false},
      {"q2", "b", true, false, false}, {"q3", "a", true, false, false},  {"q3", "b", true, false, true},
  };
  ScoreTable t = score(os);
  bool ok = t.methods.size() == 2;
  if (ok) {
    const MethodScore& a = t.methods[0];
    const MethodScore& b = t.methods[1];
    auto near = [](double x, double y) { return std::abs(x - y) < 1e-9; };
    ok = a.method == "a" && b.method == "b" && near(a.ex_acc, 100.0) && near(a.verify_acc, 200.0 / 3) &&
         near(a.cc_acc, 200.0 / 3) && near(b.ex_acc, 200.0 / 3) && near(b.verify_acc, 200.0 / 3) &&
         near(b.cc_acc, 100.0 / 3) && a.ex_rank == 1 && b.ex_rank == 2 && a.verify_rank == 1 &&
         b.verify_rank == 2 && a.cc_rank == 1 && b.cc_rank == 2 &&
         t.verify_histogram == std::map<int, int>{{1, 1}} && t.cc_histogram == std::map<int, int>{{1, 2}};
  }
  double drop = demotion_drop(207, 1533);
  Result r;
  r.detail = "scores " + std::string(ok ? "match" : "differ") + ", 207/1533 demoted -> " + fmt(drop) + " points";
  r.pass = ok && fmt(drop) == "13.50";
  return r;
}

Result ac10() {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::degenerate_pair();
  TaskConfig cfg = default_config();
  Verdict on = eqcheck(s, make_pair(s, p.gold, p.gen), cfg);
  cfg.exclude_degenerate = false;
  Verdict off = eqcheck(s, make_pair(s, p.gold, p.gen), cfg);
  Result r;
  r.detail = "excluded: " + describe(on) + "; included: " + describe(off);
  r.pass = on.kind == Verdict::Kind::EquivalentUpTo && on.bound == cfg.max_bound &&
           off.kind == Verdict::Kind::NotEquivalent && off.validated;
  return r;
}

}  // namespace

int main() {
  // Criteria that cannot pass as stated, with the shortfall that is expected.
  const std::map<std::string, std::string> kKnownGaps = {
      // ex10 differs from its gold query only by DISTINCT, which set
      // comparison cannot observe.
      {"AC2", "8/9 validated"},
  };
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  // SQLEQ_ACCEPTANCE_ONLY=AC5 runs a single criterion.
  const char* only = std::getenv("SQLEQ_ACCEPTANCE_ONLY");
  int unexpected = 0;
  for (const auto& [name, run] : criteria) {
    if (only != nullptr && name != only) continue;
    auto t0 = Clock::now();
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    std::cout << name << " " << (r.pass ? "PASS" : "FAIL") << ": " << r.detail << " [" << fmt(since(t0), 1)
              << " s]" << std::endl;
    if (!r.pass) {
      auto gap = kKnownGaps.find(name);
      bool known = gap != kKnownGaps.end() && r.detail.rfind(gap->second, 0) == 0;
      if (known) {
        std::cout << "  known gap, see notes: " << gap->second << std::endl;
      } else {
        ++unexpected;
      }
    }
  }
  return unexpected == 0 ? 0 : 1;
}
