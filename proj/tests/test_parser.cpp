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

#include "sqleq/parser.hpp"
#include "sqleq/schema.hpp"
#include "test_util.hpp"

namespace sqleq {
namespace {

using testing::fixture_schema;

ParseError::Kind error_kind(const std::string& sql, const DatabaseSchema& s) {
  try {
    parse_sql(sql, s);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "parsed: " << sql;
  return ParseError::Kind::Syntax;
}

TEST(SchemaTest, LoadsTwoColumnTable) {
  DatabaseSchema s = fixture_schema("r");
  ASSERT_EQ(s.tables.size(), 1u);
  EXPECT_EQ(s.tables[0].name, "r");
  ASSERT_EQ(s.tables[0].columns.size(), 2u);
  EXPECT_EQ(s.tables[0].columns[1].type, SqlType::Date);
}

TEST(SchemaTest, PatientLaboratoryTypes) {
  DatabaseSchema s = fixture_schema("thrombosis_prediction");
  const TableSchema* patient = s.find("patient");
  ASSERT_NE(patient, nullptr);
  EXPECT_EQ(patient->columns[patient->column_index("birthday")].type, SqlType::Date);
  EXPECT_EQ(patient->columns[patient->column_index("sex")].type, SqlType::Str);
  const TableSchema* lab = s.find("LABORATORY");
  ASSERT_NE(lab, nullptr);
  EXPECT_EQ(lab->columns[lab->column_index("rnp")].type, SqlType::Str);
}

TEST(SchemaTest, Errors) {
  EXPECT_THROW(load_schema(R"({"tables":[{"name":"t","columns":[{"name":"a","type":"int"}]},
                                         {"name":"T","columns":[{"name":"a","type":"int"}]}]})"),
               SchemaError);
  EXPECT_THROW(load_schema(R"({"tables":[{"name":"t","columns":[{"name":"a","type":"blob"}]}]})"), SchemaError);
  EXPECT_THROW(load_schema(R"({"tables":[{"name":"t"}]})"), SchemaError);
  EXPECT_THROW(load_schema(R"({"tables":[{"name":"t","columns":[{"name":"a","type":"int"},
                                                               {"name":"A","type":"str"}]}]})"),
               SchemaError);
  EXPECT_THROW(load_schema(R"({"tables":[{"name":"t","columns":[{"name":"a","type":"int"}],
                                         "primary_key":["b"]}]})"),
               SchemaError);
  EXPECT_THROW(load_schema("{"), SchemaError);
}

TEST(ParserTest, ExampleThreeShape) {
  QueryPtr q = parse_sql("SELECT id FROM R WHERE id > 1", fixture_schema("r"));
  const auto* p = q->as<ast::Project>();
  ASSERT_NE(p, nullptr);
  const auto* f = p->input->as<ast::Filter>();
  ASSERT_NE(f, nullptr);
  EXPECT_TRUE(f->input->is<ast::TableScan>());
  const auto* cmp = f->pred->as<ast::Compare>();
  ASSERT_NE(cmp, nullptr);
  EXPECT_EQ(cmp->op, CmpOp::Gt);
}

TEST(ParserTest, OrderByDescLimitOne) {
  auto pairs = testing::motivating_pairs();
  QueryPtr q = parse_sql(pairs[0].gold, fixture_schema(pairs[0].db_id));
  const auto* o = q->as<ast::OrderBy>();
  ASSERT_NE(o, nullptr);
  ASSERT_EQ(o->descending.size(), 1u);
  EXPECT_TRUE(o->descending[0]);
  EXPECT_EQ(o->limit, 1);
  EXPECT_EQ(q->columns[0].type, ExprType::Date);
}

TEST(ParserTest, StringLiteralInPredicatePositionIsKept) {
  auto pairs = testing::motivating_pairs();
  std::string d = dump(*parse_sql(pairs[0].gold, fixture_schema(pairs[0].db_id)));
  EXPECT_NE(d.find("(truth (lit str \"'+-'\""), std::string::npos) << d;
}

TEST(ParserTest, Desugarings) {
  DatabaseSchema s = fixture_schema("r");
  auto same = [&](const std::string& a, const std::string& b) {
    return structurally_equal(*parse_sql(a, s), *parse_sql(b, s));
  };
  EXPECT_TRUE(same("SELECT id FROM r WHERE id BETWEEN 1 AND 3", "SELECT id FROM r WHERE id >= 1 AND id <= 3"));
  EXPECT_TRUE(same("SELECT id FROM r WHERE id NOT IN (1, 2)", "SELECT id FROM r WHERE NOT (id IN (1, 2))"));
  EXPECT_TRUE(same("SELECT * FROM r", "SELECT r.id, r.dob FROM r"));
  EXPECT_TRUE(same("select ID from R", "SELECT id FROM r"));
  QueryPtr lim = parse_sql("SELECT id FROM r LIMIT 2", s);
  const auto* o = lim->as<ast::OrderBy>();
  ASSERT_NE(o, nullptr);
  EXPECT_TRUE(o->keys.empty());
  EXPECT_EQ(o->limit, 2);
}

TEST(ParserTest, LiteralCaseIsKept) {
  DatabaseSchema s = fixture_schema("r");
  EXPECT_FALSE(structurally_equal(*parse_sql("SELECT id FROM r WHERE dob = 'A'", s),
                                  *parse_sql("SELECT id FROM r WHERE dob = 'a'", s)));
}

TEST(ParserTest, ErrorKinds) {
  DatabaseSchema s = fixture_schema("r");
  EXPECT_EQ(error_kind("", s), ParseError::Kind::Syntax);
  EXPECT_EQ(error_kind("SELECT id FROM", s), ParseError::Kind::Syntax);
  EXPECT_EQ(error_kind("SELEC id FROM r", s), ParseError::Kind::Syntax);
  EXPECT_EQ(error_kind("SELECT nope FROM r", s), ParseError::Kind::UnresolvedName);
  EXPECT_EQ(error_kind("SELECT id FROM nope", s), ParseError::Kind::UnresolvedName);
  EXPECT_EQ(error_kind("SELECT x.id FROM r", s), ParseError::Kind::UnresolvedName);
  EXPECT_EQ(error_kind("SELECT id || 'a' FROM r", s), ParseError::Kind::Unsupported);
  EXPECT_EQ(error_kind("SELECT id FROM r WHERE EXISTS (SELECT 1 FROM r)", s), ParseError::Kind::Unsupported);
  EXPECT_EQ(error_kind("SELECT (SELECT MAX(id) FROM r) FROM r", s), ParseError::Kind::Unsupported);
}

TEST(ParserTest, ErrorCarriesPosition) {
  try {
    parse_sql("SELECT id\nFROM r WHERE id >", fixture_schema("r"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.offset(), 10u);
    EXPECT_FALSE(e.reason().empty());
  }
}

TEST(FeatureScanTest, Reports) {
  DatabaseSchema s = fixture_schema("r");
  EXPECT_TRUE(feature_scan(*parse_sql("SELECT id FROM R WHERE id > 1", s)).supported());
  SupportReport w = scan_sql("SELECT id, ROW_NUMBER() OVER (ORDER BY id) FROM r", s);
  EXPECT_EQ(w.unsupported, std::vector<std::string>{"window function"});
  SupportReport two = scan_sql("SELECT id || 'x' FROM r WHERE EXISTS (SELECT id FROM r)", s);
  EXPECT_EQ(two.unsupported.size(), 2u);
  SupportReport syn = scan_sql("SELECT FROM", s);
  ASSERT_EQ(syn.unsupported.size(), 1u);
  EXPECT_EQ(syn.unsupported[0].rfind("SyntaxError", 0), 0u) << syn.unsupported[0];
  auto pairs = testing::motivating_pairs();
  EXPECT_TRUE(scan_sql(pairs[1].gold, fixture_schema(pairs[1].db_id)).supported());
}

TEST(FeatureScanTest, ScalarSubqueryExampleIsUnsupported) {
  std::string q =
      "SELECT T1.diagnosis FROM patient AS T1 INNER JOIN examination AS T2 ON T1.id = T2.id "
      "WHERE T1.id = (SELECT id FROM examination WHERE examination_date = '1997-01-27' AND diagnosis = 'SLE') "
      "AND T2.examination_date = T1.first_date";
  SupportReport r = scan_sql(q, fixture_schema("thrombosis_prediction"));
  EXPECT_EQ(r.unsupported, std::vector<std::string>{"scalar subquery"});
}

TEST(ParserTest, RoundTripOverCorpus) {
  for (const auto& [db, sql] : testing::corpus_queries()) {
    DatabaseSchema s = fixture_schema(db);
    QueryPtr q = parse_sql(sql, s);
    std::string printed = to_sql(*q);
    QueryPtr back = parse_sql(printed, s);
    EXPECT_TRUE(structurally_equal(*q, *back)) << sql << "\n  printed: " << printed;
    EXPECT_EQ(to_sql(*back), printed);
  }
}

}  // namespace
}  // namespace sqleq
