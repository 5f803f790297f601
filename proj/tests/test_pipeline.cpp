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

#include <cmath>

#include "sqleq/db_io.hpp"
#include "sqleq/engine.hpp"
#include "sqleq/evaluator.hpp"
#include "sqleq/parser.hpp"
#include "sqleq/pipeline.hpp"
#include "test_util.hpp"

namespace sqleq {
namespace {

using testing::fixture_schema;

QueryPair make_pair(const DatabaseSchema& s, const std::string& gold, const std::string& gen) {
  return QueryPair{parse_sql(gold, s), parse_sql(gen, s), gold, gen};
}

TaskConfig quick(int k = 2, double secs = 60) {
  TaskConfig cfg;
  cfg.max_bound = k;
  cfg.budget.cpu_seconds = secs;
  return cfg;
}

TEST(BoundTest, ExampleThree) {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::example3_pair();
  QueryPair q = make_pair(s, p.gold, p.gen);
  BoundCheck c = check_bounded(s, *q.gold, *q.gen, 1, SolveBudget{30}, quick());
  ASSERT_EQ(c.kind, BoundCheck::Kind::NotEquivalent) << c.detail;
  ASSERT_TRUE(c.db);
  EXPECT_EQ(c.db->table("r").rows.at(0)[0], Value::integer(2));
  BoundCheck same = check_bounded(s, *q.gold, *q.gold, 2, SolveBudget{30}, quick());
  EXPECT_EQ(same.kind, BoundCheck::Kind::Equivalent);
  EXPECT_FALSE(same.db);
}

TEST(BoundTest, OverflowIsInconclusive) {
  DatabaseSchema s = fixture_schema("r");
  QueryPtr q = parse_sql("SELECT a.id FROM r AS a JOIN r AS b ON a.id = b.id JOIN r AS c ON b.id = c.id", s);
  TaskConfig cfg = quick();
  cfg.ceiling = 8;
  BoundCheck c = check_bounded(s, *q, *q, 3, SolveBudget{30}, cfg);
  EXPECT_EQ(c.kind, BoundCheck::Kind::Inconclusive);
  EXPECT_EQ(c.reason, InconclusiveReason::BoundOverflow);
}

TEST(BoundTest, EmitsSmtlib) {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::example3_pair();
  QueryPair q = make_pair(s, p.gold, p.gen);
  TaskConfig cfg = quick();
  cfg.emit_smtlib = true;
  BoundCheck c = check_bounded(s, *q.gold, *q.gen, 1, SolveBudget{30}, cfg);
  EXPECT_NE(c.smtlib.find("(assert"), std::string::npos);
}

TEST(EqcheckTest, ExampleThreeValidatedAtOne) {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::example3_pair();
  Verdict v = eqcheck(s, make_pair(s, p.gold, p.gen), quick(5));
  EXPECT_EQ(describe(v), "not equivalent at k=1 (validated)");
  ASSERT_TRUE(v.db);
  EXPECT_EQ(v.db->table("r").rows.at(0)[0], Value::integer(2));
}

TEST(EqcheckTest, EquivalentUpToBound) {
  DatabaseSchema s = fixture_schema("r");
  Verdict v = eqcheck(s, make_pair(s, "SELECT id FROM r WHERE id > 1", "SELECT id FROM r WHERE id >= 2"), quick(3));
  EXPECT_EQ(v.kind, Verdict::Kind::EquivalentUpTo);
  EXPECT_EQ(v.bound, 3);
  EXPECT_EQ(describe(v), "equivalent up to k=3");
}

TEST(EqcheckTest, FirstMotivatingPair) {
  DatabaseSchema s = fixture_schema("thrombosis_prediction");
  auto p = testing::motivating_pairs()[0];
  Verdict v = eqcheck(s, make_pair(s, p.gold, p.gen), quick(2));
  ASSERT_EQ(v.kind, Verdict::Kind::NotEquivalent) << describe(v);
  EXPECT_TRUE(v.validated);
  EXPECT_LE(v.bound, 2);
  EXPECT_EQ(ex_metric(*parse_sql(p.gold, s), *parse_sql(p.gen, s), *v.db), 0);
}

TEST(EqcheckTest, TiesAreSpuriousOnly) {
  auto p = testing::tie_pair();
  DatabaseSchema s = fixture_schema(p.db_id);
  Verdict v = eqcheck(s, make_pair(s, p.gold, p.gen), quick(2));
  EXPECT_EQ(v.kind, Verdict::Kind::Inconclusive) << describe(v);
  EXPECT_EQ(v.reason, InconclusiveReason::SpuriousOnly);
  EXPECT_GE(v.spurious, 1);
  EXPECT_FALSE(v.db);
}

TEST(EqcheckTest, DegenerateToggle) {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::degenerate_pair();
  TaskConfig cfg = quick(2);
  EXPECT_EQ(eqcheck(s, make_pair(s, p.gold, p.gen), cfg).kind, Verdict::Kind::EquivalentUpTo);
  cfg.exclude_degenerate = false;
  Verdict v = eqcheck(s, make_pair(s, p.gold, p.gen), cfg);
  ASSERT_EQ(v.kind, Verdict::Kind::NotEquivalent);
  EXPECT_EQ(v.bound, 1);
  EXPECT_TRUE(v.db->table("r").empty());
}

TEST(EqcheckTest, TimeoutIsInconclusive) {
  auto p = testing::motivating_pairs()[7];
  DatabaseSchema s = fixture_schema(p.db_id);
  Verdict v = eqcheck(s, make_pair(s, p.gold, p.gen), quick(5, 0.001));
  EXPECT_EQ(v.kind, Verdict::Kind::Inconclusive);
  EXPECT_EQ(v.reason, InconclusiveReason::Timeout);
}

TEST(EqcheckTest, CacheHit) {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::example3_pair();
  VerdictCache cache;
  TaskConfig cfg = quick(2);
  Verdict a = eqcheck(s, make_pair(s, p.gold, p.gen), cfg, &cache);
  EXPECT_EQ(cache.size(), 1u);
  Verdict b = eqcheck(s, make_pair(s, p.gold, p.gen), cfg, &cache);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(describe(a), describe(b));
  EXPECT_EQ(a.seconds, b.seconds);
  cfg.max_bound = 3;
  eqcheck(s, make_pair(s, p.gold, p.gen), cfg, &cache);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(EqcheckTest, ConfigValidation) {
  DatabaseSchema s = fixture_schema("r");
  auto p = testing::example3_pair();
  TaskConfig cfg = quick();
  cfg.max_bound = 0;
  EXPECT_THROW(eqcheck(s, make_pair(s, p.gold, p.gen), cfg), std::invalid_argument);
  cfg = quick();
  cfg.budget.cpu_seconds = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  TaskConfig a = quick(), b = quick();
  b.exclude_degenerate = false;
  EXPECT_NE(a.cache_key(), b.cache_key());
}

// The reported bound is the smallest with a witness, and witnesses persist
// at larger bounds.
TEST(EqcheckTest, MinimalityAndMonotonicity) {
  DatabaseSchema s = fixture_schema("r");
  const std::vector<std::pair<const char*, const char*>> pairs = {
      {"SELECT id FROM r WHERE id > 1", "SELECT id FROM r WHERE id > 2"},
      {"SELECT COUNT(*) FROM r", "SELECT COUNT(id) FROM r"},
      {"SELECT id FROM r ORDER BY id LIMIT 1", "SELECT MIN(id) FROM r"},
      {"SELECT COUNT(DISTINCT id) FROM r", "SELECT COUNT(id) FROM r"},
      {"SELECT a.id FROM r AS a JOIN r AS b ON a.id < b.id", "SELECT id FROM r WHERE id IS NOT NULL"},
  };
  TaskConfig cfg = quick(3);
  for (const auto& [a, b] : pairs) {
    QueryPair q = make_pair(s, a, b);
    Verdict v = eqcheck(s, q, cfg);
    ASSERT_EQ(v.kind, Verdict::Kind::NotEquivalent) << a << " | " << b << ": " << describe(v);
    for (int k = 1; k < v.bound; ++k) {
      EXPECT_EQ(check_bounded(s, *q.gold, *q.gen, k, SolveBudget{30}, cfg).kind, BoundCheck::Kind::Equivalent)
          << a << " k=" << k;
    }
    for (int k = v.bound; k <= 3; ++k) {
      EXPECT_EQ(check_bounded(s, *q.gold, *q.gen, k, SolveBudget{30}, cfg).kind, BoundCheck::Kind::NotEquivalent)
          << a << " k=" << k;
    }
  }
}

TEST(ValidationTest, BothBackends) {
  DatabaseSchema s = fixture_schema("thrombosis_prediction");
  ConcreteDb a1 = load_dump_file(testing::fixture("appendix_a1.db.json"), s);
  auto p = testing::motivating_pairs()[0];
  QueryPair q = make_pair(s, p.gold, p.gen);
  Validation ref = validate_counterexample(s, q, a1, Backend::Reference);
  EXPECT_TRUE(ref.validated);
  EXPECT_EQ(ref.used, Backend::Reference);
  QueryPair same = make_pair(s, p.gold, p.gold);
  EXPECT_FALSE(validate_counterexample(s, same, a1, Backend::Reference).validated);
  if (!locate_sqlite()) GTEST_SKIP() << "no SQLite executable";
  Validation ext = validate_counterexample(s, q, a1, Backend::ExternalEngine);
  EXPECT_TRUE(ext.validated) << ext.diagnostic;
  EXPECT_EQ(ext.used, Backend::ExternalEngine);
  EXPECT_FALSE(validate_counterexample(s, same, a1, Backend::ExternalEngine).validated);
  EXPECT_EQ(engine_ex(*locate_sqlite(), s, q, a1), 0);
  EXPECT_EQ(engine_ex(*locate_sqlite(), s, same, a1), 1);
}

TEST(ValidationTest, TieDatabaseIsNotAWitness) {
  auto p = testing::tie_pair();
  DatabaseSchema s = fixture_schema(p.db_id);
  QueryPair q = make_pair(s, p.gold, p.gen);
  // Random databases with ties: both queries break a tie the same way.
  std::mt19937 rng(5);
  int disagreements = 0;
  for (int i = 0; i < 200; ++i) {
    ConcreteDb db = testing::random_db(s, rng, 3);
    disagreements += validate_counterexample(s, q, db, Backend::Reference).validated;
  }
  EXPECT_EQ(disagreements, 0);
}

MethodResult result(const DatabaseSchema& s, const std::string& qid, const std::string& method,
                    const std::string& gold, const std::string& gen) {
  MethodResult r;
  r.question_id = qid;
  r.method = method;
  r.schema = &s;
  r.pair = make_pair(s, gold, gen);
  return r;
}

TEST(CrossCheckTest, SharesWitnesses) {
  DatabaseSchema s = fixture_schema("r");
  const std::string gold = "SELECT id FROM r WHERE id > 1";
  std::vector<MethodResult> rs;
  rs.push_back(result(s, "q1", "m2", gold, "SELECT id FROM r WHERE id > 2"));
  rs.push_back(result(s, "q1", "m1", gold, "SELECT id FROM r WHERE id >= 3"));
  rs.push_back(result(s, "q1", "m3", gold, "SELECT id FROM r WHERE id >= 2"));
  rs.push_back(result(s, "q2", "m1", gold, "SELECT id FROM r WHERE id > 2"));
  // m2 holds the witness {r: (2, NULL)}; m1 is wrong the same way but has no witness.
  ConcreteDb w;
  w.tables["r"] = Relation{2, {{Value::integer(2), Value::null()}}};
  rs[0].own.push_back(w);
  cross_check(rs, quick());
  ASSERT_EQ(rs[0].question_id, "q1");
  ASSERT_EQ(rs[0].method, "m1");
  EXPECT_EQ(rs[0].borrowed.size(), 1u);
  EXPECT_TRUE(rs[1].borrowed.empty());  // m2 already owns it
  EXPECT_TRUE(rs[2].borrowed.empty());  // m3 is correct
  EXPECT_TRUE(rs[3].borrowed.empty());  // other question
  rs[0].borrowed.clear();
  rs[1].eligible = false;
  cross_check(rs, quick());
  EXPECT_TRUE(rs[0].borrowed.empty());
}

TEST(ScoreTest, HandComputed) {
  // q1: a passes, b fails EX.
  // q2: a demoted by verification, b demoted by cross-checking.
  // q3: no static database; both demoted by verification.
  std::vector<Outcome> os = {
      {"q1", "a", true, false, false}, {"q1", "b", false, false, false},
      {"q2", "a", true, true, false},  {"q2", "b", true, false, true},
      {"q3", "a", std::nullopt, true, false}, {"q3", "b", std::nullopt, true, false},
  };
  ScoreTable t = score(os);
  ASSERT_EQ(t.methods.size(), 2u);
  const MethodScore& a = t.methods[0];
  const MethodScore& b = t.methods[1];
  EXPECT_EQ(a.method, "a");
  EXPECT_EQ(a.ex_pass, 3);
  EXPECT_EQ(a.verify_pass, 1);
  EXPECT_EQ(a.cc_pass, 1);
  EXPECT_EQ(b.ex_pass, 2);
  EXPECT_EQ(b.verify_pass, 1);
  EXPECT_EQ(b.cc_pass, 0);
  EXPECT_DOUBLE_EQ(a.ex_acc, 100.0);
  EXPECT_NEAR(b.verify_acc, 100.0 / 3, 1e-9);
  EXPECT_EQ(a.ex_rank, 1);
  EXPECT_EQ(b.ex_rank, 2);
  EXPECT_EQ(a.verify_rank, 1);  // tie keeps name order
  EXPECT_EQ(b.verify_rank, 2);
  EXPECT_EQ(a.cc_rank, 1);
  EXPECT_EQ(b.cc_rank, 2);
  // q2: one verify demotion; q3: two.
  EXPECT_EQ(t.verify_histogram, (std::map<int, int>{{1, 1}, {2, 1}}));
  EXPECT_EQ(t.cc_histogram, (std::map<int, int>{{2, 2}}));
}

TEST(ScoreTest, DemotionDrop) {
  EXPECT_NEAR(demotion_drop(207, 1533), 13.50, 0.005);
  EXPECT_DOUBLE_EQ(demotion_drop(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(demotion_drop(5, 5), 100.0);
}

}  // namespace
}  // namespace sqleq
