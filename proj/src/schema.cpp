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

#include "sqleq/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sqleq {

using nlohmann::json;

const char* sql_type_name(SqlType t) {
  switch (t) {
    case SqlType::Int:
      return "int";
    case SqlType::Str:
      return "str";
    case SqlType::Date:
      return "date";
  }
  return "?";
}

std::optional<SqlType> parse_sql_type(std::string_view keyword) {
  std::string k = to_lower(keyword);
  if (k == "int" || k == "integer") return SqlType::Int;
  if (k == "str" || k == "text" || k == "string") return SqlType::Str;
  if (k == "date") return SqlType::Date;
  return std::nullopt;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

int TableSchema::column_index(std::string_view n) const {
  std::string key = to_lower(n);
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == key) return static_cast<int>(i);
  }
  return -1;
}

bool TableSchema::is_key_column(size_t index) const {
  return std::find(primary_key.begin(), primary_key.end(),
                   columns.at(index).name) != primary_key.end();
}

const TableSchema* DatabaseSchema::find(std::string_view name) const {
  std::string key = to_lower(name);
  for (const auto& t : tables) {
    if (t.name == key) return &t;
  }
  return nullptr;
}

const TableSchema& DatabaseSchema::table(std::string_view name) const {
  const TableSchema* t = find(name);
  if (t == nullptr) throw SchemaError("unknown table '" + std::string(name) + "'");
  return *t;
}

void DatabaseSchema::validate() const {
  std::set<std::string> names;
  for (const auto& t : tables) {
    if (t.name.empty()) throw SchemaError("table with empty name");
    if (!names.insert(t.name).second) {
      throw SchemaError("duplicate table '" + t.name + "'");
    }
    if (t.columns.empty()) throw SchemaError("table '" + t.name + "' has no columns");
    std::set<std::string> cols;
    for (const auto& c : t.columns) {
      if (c.name.empty()) throw SchemaError("column with empty name in '" + t.name + "'");
      if (!cols.insert(c.name).second) {
        throw SchemaError("duplicate column '" + c.name + "' in table '" + t.name + "'");
      }
    }
    for (const auto& k : t.primary_key) {
      if (!cols.count(k)) {
        throw SchemaError("primary key column '" + k + "' not in table '" + t.name + "'");
      }
    }
  }
}

namespace {

const json& require(const json& obj, const char* field, const std::string& where) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw SchemaError(where + ": missing field '" + field + "'");
  }
  return obj.at(field);
}

std::string require_string(const json& obj, const char* field, const std::string& where) {
  const json& v = require(obj, field, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

DatabaseSchema load_schema(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed schema document: ") + e.what());
  }
  const json& tables = require(doc, "tables", "schema");
  if (!tables.is_array()) throw SchemaError("schema: 'tables' must be an array");
  DatabaseSchema schema;
  for (const json& jt : tables) {
    TableSchema t;
    t.name = to_lower(require_string(jt, "name", "table"));
    const json& cols = require(jt, "columns", "table '" + t.name + "'");
    if (!cols.is_array()) throw SchemaError("table '" + t.name + "': 'columns' must be an array");
    for (const json& jc : cols) {
      std::string where = "column in '" + t.name + "'";
      ColumnSchema c;
      c.name = to_lower(require_string(jc, "name", where));
      std::string type = require_string(jc, "type", where);
      auto st = parse_sql_type(type);
      if (!st) throw SchemaError("unknown type '" + type + "' for column '" + c.name + "'");
      c.type = *st;
      if (jc.contains("nullable")) {
        if (!jc["nullable"].is_boolean()) throw SchemaError(where + ": 'nullable' must be a boolean");
        c.nullable = jc["nullable"].get<bool>();
      }
      t.columns.push_back(std::move(c));
    }
    if (jt.contains("primary_key")) {
      const json& pk = jt["primary_key"];
      if (!pk.is_array()) throw SchemaError("table '" + t.name + "': 'primary_key' must be an array");
      for (const json& k : pk) {
        if (!k.is_string()) throw SchemaError("table '" + t.name + "': key names must be strings");
        t.primary_key.push_back(to_lower(k.get<std::string>()));
      }
    }
    schema.tables.push_back(std::move(t));
  }
  schema.validate();
  return schema;
}

DatabaseSchema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_schema(ss.str());
}

std::string dump_schema(const DatabaseSchema& schema) {
  json tables = json::array();
  for (const auto& t : schema.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) {
      json jc = {{"name", c.name}, {"type", sql_type_name(c.type)}};
      if (!c.nullable) jc["nullable"] = false;
      cols.push_back(jc);
    }
    json jt = {{"name", t.name}, {"columns", cols}};
    if (!t.primary_key.empty()) jt["primary_key"] = t.primary_key;
    tables.push_back(jt);
  }
  return json{{"tables", tables}}.dump(2);
}

std::string schema_fingerprint(const DatabaseSchema& schema) {
  return dump_schema(schema);
}

}  // namespace sqleq
