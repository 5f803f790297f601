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


// Encoder/evaluator differential cases: random scalar expressions over one
// table, and whole queries, compared on pinned concrete databases.

#ifndef SQLEQ_TESTS_DIFFERENTIAL_HPP_
#define SQLEQ_TESTS_DIFFERENTIAL_HPP_

#include <random>
#include <string>
#include <vector>

#include "sqleq/encoder.hpp"
#include "sqleq/evaluator.hpp"
#include "sqleq/parser.hpp"
#include "sqleq/solver.hpp"
#include "test_util.hpp"

namespace sqleq::testing {

inline RandomPools diff_pools() {
  RandomPools p;
  p.ints = {-7, -1, 0, 1, 2, 3, 12, 20120825, 19970127};
  p.strs = {"", "a", "abc", "ABC", "+-", "-", "12", "-3", "007", "a_c", "2012-08-25", "19970127", "1997-02-30", "x%y"};
  p.dates = {{0, 1, 1}, {1000, 1, 1}, {1900, 2, 28}, {1996, 2, 29}, {1997, 1, 27}, {2012, 8, 25}, {9999, 12, 31}};
  p.null_rate = 0.2;
  return p;
}

// Typed SQL expression text over t(a int, b int, s str, u str, d date).
class ExprGen {
 public:
  explicit ExprGen(uint32_t seed) : rng_(seed) {}

  std::string int_expr(int depth) {
    if (depth <= 0 || coin(0.3)) return int_leaf();
    switch (pick(10)) {
      case 0:
        return "(" + int_expr(depth - 1) + " " + one_of({"+", "-", "*", "/", "%"}) + " " + int_expr(depth - 1) + ")";
      case 1:
        return "CAST(" + str_expr(depth - 1) + " AS INTEGER)";
      case 2:
        return "CAST(" + date_expr(depth - 1) + " AS INTEGER)";
      case 3:
        return "STRFTIME('" + one_of({"%Y", "%m", "%d", "%M"}) + "', " +
               (coin(0.5) ? date_expr(depth - 1) : str_expr(depth - 1)) + ")";
      case 4:
        return "CASE WHEN " + pred(depth - 1) + " THEN " + int_expr(depth - 1) + " WHEN " + pred(depth - 1) +
               " THEN " + int_expr(depth - 1) + " ELSE " + int_expr(depth - 1) + " END";
      case 5:
        return "IIF(" + pred(depth - 1) + ", " + int_expr(depth - 1) + ", " + int_expr(depth - 1) + ")";
      case 6:
        return "(" + pred(depth - 1) + ")";
      case 7:
        return "COALESCE(" + int_expr(depth - 1) + ", " + int_expr(depth - 1) + ")";
      case 8:
        return "STRFTIME('%Y', " + int_expr(depth - 1) + ")";
      default:
        return "-(" + int_leaf() + ")";
    }
  }

  std::string str_expr(int depth) {
    if (depth <= 0 || coin(0.3)) return str_leaf();
    switch (pick(5)) {
      case 0:
        return "SUBSTR(" + str_expr(depth - 1) + ", " + int_expr(depth - 1) + ", " + int_expr(depth - 1) + ")";
      case 1:
        return "CAST(" + int_expr(depth - 1) + " AS TEXT)";
      case 2:
        return "CAST(" + date_expr(depth - 1) + " AS TEXT)";
      case 3:
        return "IIF(" + pred(depth - 1) + ", " + str_expr(depth - 1) + ", " + str_expr(depth - 1) + ")";
      default:
        return "SUBSTR(" + str_expr(depth - 1) + ", " + std::to_string(static_cast<int>(pick(9)) - 4) + ", " +
               std::to_string(pick(6)) + ")";
    }
  }

  std::string date_expr(int depth) {
    if (depth <= 0 || coin(0.5)) return coin(0.85) ? "d" : "DATE('" + one_of({"2012-08-25", "1000-01-01"}) + "')";
    switch (pick(3)) {
      case 0:
        return "DATE(" + str_expr(depth - 1) + ")";
      case 1:
        return "DATE(" + int_expr(depth - 1) + ")";
      default:
        return "IIF(" + pred(depth - 1) + ", " + date_expr(depth - 1) + ", d)";
    }
  }

  std::string real_expr(int depth) {
    if (coin(0.5)) return "JULIANDAY(" + date_expr(depth - 1) + ")";
    return "(JULIANDAY(" + date_expr(depth - 1) + ") - JULIANDAY(" + date_expr(depth - 1) + "))";
  }

  std::string pred(int depth) {
    if (depth <= 0) return int_leaf() + " " + cmp() + " " + int_leaf();
    switch (pick(15)) {
      case 0:
        return int_expr(depth - 1) + " " + cmp() + " " + int_expr(depth - 1);
      case 1:
        return str_expr(depth - 1) + " " + cmp() + " " + str_expr(depth - 1);
      case 2:
        return date_expr(depth - 1) + " " + cmp() + " " + date_expr(depth - 1);
      case 3:
        return date_expr(depth - 1) + " " + cmp() + " '" + one_of({"2012", "2012-08-25", "1997-01-27x", "", "1"}) + "'";
      case 4:
        return int_expr(depth - 1) + " " + cmp() + " " + str_expr(depth - 1);
      case 5:
        return (coin(0.5) ? int_expr(depth - 1) : str_expr(depth - 1)) + (coin(0.5) ? " IS NULL" : " IS NOT NULL");
      case 6:
        return int_expr(depth - 1) + (coin(0.3) ? " NOT" : "") + " IN (1, " + int_leaf() + ", -1)";
      case 7:
        return str_expr(depth - 1) + " LIKE '" + one_of({"a%", "%c", "_", "%-%", "a_c", "%", "2012%", "A%"}) + "'";
      case 8:
        return "(" + pred(depth - 1) + " " + one_of({"AND", "OR"}) + " " + pred(depth - 1) + ")";
      case 9:
        return "NOT (" + pred(depth - 1) + ")";
      case 10:
        return int_expr(depth - 1) + " BETWEEN " + int_leaf() + " AND " + int_leaf();
      case 11:
        return coin(0.5) ? str_expr(depth - 1) : int_expr(depth - 1);
      case 12:
        return real_expr(depth - 1) + " " + cmp() + " " + (coin(0.5) ? "2451544.5" : real_expr(depth - 1));
      case 13:
        return str_expr(depth - 1) + " " + cmp() + " " + int_leaf();
      default:
        return date_expr(depth - 1) + " " + cmp() + " " + int_expr(depth - 1);
    }
  }

  // One projected expression of any type.
  std::string any(int depth) {
    switch (pick(5)) {
      case 0:
        return int_expr(depth);
      case 1:
        return str_expr(depth);
      case 2:
        return date_expr(depth);
      case 3:
        return real_expr(depth);
      default:
        return "(" + pred(depth) + ")";
    }
  }

  std::mt19937& rng() { return rng_; }

 private:
  size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::string one_of(std::initializer_list<const char*> xs) { return *(xs.begin() + pick(xs.size())); }
  std::string cmp() { return one_of({"=", "!=", "<", "<=", ">", ">="}); }
  std::string int_leaf() {
    switch (pick(6)) {
      case 0:
        return "a";
      case 1:
        return "b";
      case 2:
        return "NULL";
      default:
        return std::to_string(static_cast<int>(pick(8)) - 2);
    }
  }
  std::string str_leaf() {
    switch (pick(5)) {
      case 0:
        return "s";
      case 1:
        return "u";
      default:
        return "'" + one_of({"", "a", "abc", "12", "-3", "+-", "2012-08-25", "1997-01-27"}) + "'";
    }
  }

  std::mt19937 rng_;
};

struct DiffOutcome {
  bool ok = true;
  bool skipped = false;  // the evaluator rejected the input
  std::string detail;
};

// Evaluates `q` on `db` both concretely and through the encoder with the
// symbolic database pinned to `db`; results must match as row lists when
// `ordered`, as row sets otherwise.
inline DiffOutcome differential(const DatabaseSchema& schema, const Query& q, const ConcreteDb& db, bool ordered,
                                size_t ceiling = 64) {
  DiffOutcome out;
  Relation want;
  try {
    want = eval_query(db, q);
  } catch (const EvalError& e) {
    out.skipped = true;
    out.detail = e.what();
    return out;
  }
  z3::context ctx;
  EncodeOptions opts;
  opts.ceiling = ceiling;
  Encoder enc(ctx, opts);
  int k = 1;
  for (const auto& [_, r] : db.tables) k = std::max<int>(k, static_cast<int>(r.size()));
  SymDb sym = enc.alloc_symbolic_db(schema, k);
  EncodingResult res = enc.encode_query(sym, q);
  std::vector<z3::expr> all = enc.constraints();
  all.insert(all.end(), res.constraints.begin(), res.constraints.end());
  SolveResult sr = solve(ctx, all, SolveBudget{60}, fix_database(sym, db));
  if (sr.status != SolveStatus::Sat) {
    out.ok = false;
    out.detail = std::string("pinned formula is ") + solve_status_name(sr.status) + " " + sr.reason;
    return out;
  }
  Relation got = decode_relation(*sr.model, res.result);
  bool same = got.size() == want.size() || !ordered;
  if (same && ordered) {
    for (size_t i = 0; i < got.size() && same; ++i) same = row_identity_key(got.rows[i]) == row_identity_key(want.rows[i]);
  } else if (same) {
    same = same_row_set(got, want);
  }
  if (!same) {
    out.ok = false;
    out.detail = "evaluator:\n" + format_relation(want, q.columns) + "encoder:\n" + format_relation(got, q.columns);
  }
  return out;
}

struct DiffStats {
  int cases = 0;
  int skipped = 0;
  std::vector<std::string> failures;
  std::vector<std::string> passed;  // SQL of the matching cases
};

// `n` random expression cases over the diff fixture schema.
inline DiffStats expression_differential(int n, uint32_t seed) {
  DatabaseSchema schema = fixture_schema("diff");
  ExprGen gen(seed);
  RandomPools pools = diff_pools();
  DiffStats stats;
  while (stats.cases < n) {
    std::string sql = "SELECT " + gen.any(3) + " FROM t";
    QueryPtr q;
    try {
      q = parse_sql(sql, schema);
    } catch (const ParseError& e) {
      if (e.kind() != ParseError::Kind::Unsupported) throw std::runtime_error(sql + ": " + e.what());
      continue;
    }
    ConcreteDb db;
    do {
      db = random_db(schema, gen.rng(), 3, pools);
    } while (db.table("t").empty());
    DiffOutcome o = differential(schema, *q, db, true);
    if (o.skipped) {
      ++stats.skipped;
      continue;
    }
    ++stats.cases;
    if (!o.ok) {
      stats.failures.push_back(sql + "\n" + o.detail);
    } else {
      stats.passed.push_back(sql);
    }
  }
  return stats;
}

}  // namespace sqleq::testing

#endif  // SQLEQ_TESTS_DIFFERENTIAL_HPP_
