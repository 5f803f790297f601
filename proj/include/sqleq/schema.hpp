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

#ifndef SQLEQ_SCHEMA_HPP_
#define SQLEQ_SCHEMA_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqleq {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SqlType { Int, Str, Date };

const char* sql_type_name(SqlType t);
std::optional<SqlType> parse_sql_type(std::string_view keyword);

struct ColumnSchema {
  std::string name;
  SqlType type = SqlType::Int;
  bool nullable = true;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnSchema> columns;
  std::vector<std::string> primary_key;

  // Index of the column, or -1.
  int column_index(std::string_view name) const;
  bool is_key_column(size_t index) const;
};

struct DatabaseSchema {
  std::vector<TableSchema> tables;

  const TableSchema* find(std::string_view name) const;
  const TableSchema& table(std::string_view name) const;

  // Checks uniqueness of table and column names and key references.
  void validate() const;
};

// Identifiers are case-insensitive; everything is stored lower-case.
std::string to_lower(std::string_view s);

// JSON document:
//   {"tables": [{"name": "R",
//                "columns": [{"name": "id", "type": "int"},
//                            {"name": "dob", "type": "date", "nullable": true}],
//                "primary_key": ["id"]}]}
DatabaseSchema load_schema(std::string_view text);
DatabaseSchema load_schema_file(const std::string& path);
std::string dump_schema(const DatabaseSchema& schema);

// Stable digest of the schema, used for cache keys.
std::string schema_fingerprint(const DatabaseSchema& schema);

}  // namespace sqleq

#endif  // SQLEQ_SCHEMA_HPP_
