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

#include "sqleq/db_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sqleq {

using nlohmann::json;

namespace {

json tagged(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
      return "null";
    case ValueKind::Int:
      return json{{"int", v.as_int()}};
    case ValueKind::Real:
      return json{{"real", v.as_real().to_string()}};
    case ValueKind::Str:
      return json{{"str", v.as_str()}};
    case ValueKind::Date:
      return json{{"date", format_date(v.as_date())}};
  }
  return nullptr;
}

Value untag(const json& j, SqlType type, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "null") return Value::null();
  if (!j.is_object() || j.size() != 1) throw MalformedDump(where + ": expected a tagged scalar");
  switch (type) {
    case SqlType::Int:
      if (j.contains("int") && j["int"].is_number_integer()) return Value::integer(j["int"].get<int64_t>());
      break;
    case SqlType::Str:
      if (j.contains("str") && j["str"].is_string()) return Value::str(j["str"].get<std::string>());
      break;
    case SqlType::Date:
      if (j.contains("date") && j["date"].is_string()) {
        auto d = parse_iso_date(j["date"].get<std::string>());
        if (!d) throw MalformedDump(where + ": invalid date");
        return Value::date(*d);
      }
      break;
  }
  throw MalformedDump(where + ": value does not match column type " + sql_type_name(type));
}

std::string quote_ident(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* storage_type(SqlType t) { return t == SqlType::Int ? "INTEGER" : "TEXT"; }

void check_row(const TableSchema& t, const Tuple& row) {
  if (row.size() != t.columns.size()) {
    throw MalformedDump("table '" + t.name + "': row has " + std::to_string(row.size()) + " values, expected " +
                        std::to_string(t.columns.size()));
  }
}

}  // namespace

std::string dump_json(const ConcreteDb& db, const DatabaseSchema& schema) {
  json tables = json::object();
  // Object keys sort alphabetically; rows keep their order.
  for (const auto& t : schema.tables) {
    json rows = json::array();
    auto it = db.tables.find(t.name);
    if (it != db.tables.end()) {
      for (const auto& row : it->second.rows) {
        json r = json::array();
        for (const auto& v : row) r.push_back(tagged(v));
        rows.push_back(std::move(r));
      }
    }
    tables[t.name] = std::move(rows);
  }
  return json{{"tables", tables}}.dump(2) + "\n";
}

ConcreteDb load_dump(const std::string& text, const DatabaseSchema& schema) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedDump(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_object()) {
    throw MalformedDump("missing \"tables\" object");
  }
  const json& tables = doc["tables"];
  for (const auto& [name, _] : tables.items()) {
    if (schema.find(to_lower(name)) == nullptr) throw MalformedDump("unknown table '" + name + "'");
  }
  ConcreteDb db;
  for (const auto& t : schema.tables) {
    const json* rows = nullptr;
    for (const auto& [name, value] : tables.items()) {
      if (to_lower(name) == t.name) rows = &value;
    }
    if (rows == nullptr) throw MalformedDump("missing table '" + t.name + "'");
    if (!rows->is_array()) throw MalformedDump("table '" + t.name + "': rows must be an array");
    Relation rel;
    rel.arity = t.columns.size();
    size_t r = 0;
    for (const auto& row : *rows) {
      if (!row.is_array() || row.size() != t.columns.size()) {
        throw MalformedDump("table '" + t.name + "' row " + std::to_string(r) + ": wrong number of values");
      }
      Tuple tuple;
      for (size_t c = 0; c < t.columns.size(); ++c) {
        tuple.push_back(untag(row[c], t.columns[c].type, "table '" + t.name + "' row " + std::to_string(r)));
      }
      rel.rows.push_back(std::move(tuple));
      ++r;
    }
    db.tables.emplace(t.name, std::move(rel));
  }
  return db;
}

ConcreteDb load_dump_file(const std::string& path, const DatabaseSchema& schema) {
  std::ifstream in(path);
  if (!in) throw MalformedDump("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_dump(ss.str(), schema);
}

std::string sql_literal(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
      return "NULL";
    case ValueKind::Int:
      return std::to_string(v.as_int());
    case ValueKind::Real:
      return v.as_real().to_string();
    case ValueKind::Str:
    case ValueKind::Date: {
      std::string s = v.is_str() ? v.as_str() : format_date(v.as_date());
      std::string out = "'";
      for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
  }
  return "NULL";
}

std::string create_script(const DatabaseSchema& schema) {
  std::string out;
  for (const auto& t : schema.tables) {
    out += "CREATE TABLE " + quote_ident(t.name) + " (";
    for (size_t i = 0; i < t.columns.size(); ++i) {
      if (i) out += ", ";
      out += quote_ident(t.columns[i].name) + " " + storage_type(t.columns[i].type);
      if (!t.columns[i].nullable) out += " NOT NULL";
    }
    if (!t.primary_key.empty()) {
      out += ", PRIMARY KEY (";
      for (size_t i = 0; i < t.primary_key.size(); ++i) {
        if (i) out += ", ";
        out += quote_ident(t.primary_key[i]);
      }
      out += ")";
    }
    out += ");\n";
  }
  return out;
}

std::string insert_script(const ConcreteDb& db, const DatabaseSchema& schema, bool with_create) {
  std::string out = with_create ? create_script(schema) : "";
  for (const auto& t : schema.tables) {
    auto it = db.tables.find(t.name);
    if (it == db.tables.end()) continue;
    for (const auto& row : it->second.rows) {
      check_row(t, row);
      out += "INSERT INTO " + quote_ident(t.name) + " VALUES (";
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ", ";
        out += sql_literal(row[i]);
      }
      out += ");\n";
    }
  }
  return out;
}

namespace {

// Minimal reader for the INSERT statements emitted above and the usual
// hand-written variants (multi-row VALUES, column lists are rejected).
class ScriptReader {
 public:
  explicit ScriptReader(const std::string& s) : s_(s) {}

  bool at_end() {
    skip_space();
    return pos_ >= s_.size();
  }

  void skip_space() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_.compare(pos_, 2, "--") == 0) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string word() {
    skip_space();
    size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return to_lower(s_.substr(start, pos_ - start));
  }

  std::string ident() {
    skip_space();
    if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '`')) {
      char q = s_[pos_++];
      std::string out;
      while (pos_ < s_.size()) {
        if (s_[pos_] == q) {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == q) {
            out += q;
            pos_ += 2;
            continue;
          }
          ++pos_;
          return to_lower(out);
        }
        out += s_[pos_++];
      }
      fail("unterminated identifier");
    }
    std::string w = word();
    if (w.empty()) fail("expected an identifier");
    return w;
  }

  bool eat(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  // Skips to just past the next ';' outside string literals.
  void skip_statement() {
    while (pos_ < s_.size()) {
      char c = s_[pos_++];
      if (c == '\'') {
        while (pos_ < s_.size()) {
          if (s_[pos_++] == '\'') {
            if (pos_ < s_.size() && s_[pos_] == '\'') {
              ++pos_;
              continue;
            }
            break;
          }
        }
      } else if (c == ';') {
        return;
      }
    }
  }

  Value literal() {
    skip_space();
    if (pos_ >= s_.size()) fail("expected a value");
    char c = s_[pos_];
    if (c == '\'') {
      ++pos_;
      std::string out;
      while (true) {
        if (pos_ >= s_.size()) fail("unterminated string");
        char ch = s_[pos_++];
        if (ch == '\'') {
          if (pos_ < s_.size() && s_[pos_] == '\'') {
            out += '\'';
            ++pos_;
            continue;
          }
          break;
        }
        out += ch;
      }
      return Value::str(out);
    }
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_++;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      std::string text = s_.substr(start, pos_ - start);
      if (text[0] == '+') text.erase(0, 1);
      if (text.find('.') == std::string::npos) {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || p != text.data() + text.size()) fail("bad integer '" + text + "'");
        return Value::integer(v);
      }
      auto r = Rational::parse_decimal(text);
      if (!r) fail("bad number '" + text + "'");
      return Value::real(*r);
    }
    std::string w = word();
    if (w == "null") return Value::null();
    fail("unsupported value '" + w + "'");
  }

  [[noreturn]] void fail(const std::string& what) {
    throw MalformedDump("INSERT script offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;
};

Value store(const Value& v, const ColumnSchema& col, const std::string& table) {
  if (v.is_null()) {
    if (!col.nullable) throw MalformedDump("table '" + table + "': NULL in non-nullable column " + col.name);
    return v;
  }
  switch (col.type) {
    case SqlType::Int:
      if (v.is_int()) return v;
      if (v.is_real() && v.as_real().is_integer()) return Value::integer(v.as_real().num());
      break;
    case SqlType::Str:
      if (v.is_str()) return v;
      if (v.is_int()) return Value::str(std::to_string(v.as_int()));
      break;
    case SqlType::Date:
      if (v.is_str()) {
        if (auto d = parse_iso_date(v.as_str())) return Value::date(*d);
      }
      break;
  }
  throw MalformedDump("table '" + table + "': value " + v.to_string() + " does not fit column " + col.name);
}

}  // namespace

ConcreteDb load_insert_script(const std::string& text, const DatabaseSchema& schema) {
  ConcreteDb db;
  for (const auto& t : schema.tables) db.tables[t.name].arity = t.columns.size();
  ScriptReader rd(text);
  while (!rd.at_end()) {
    if (rd.eat(';')) continue;
    std::string kw = rd.word();
    if (kw != "insert") {
      rd.skip_statement();
      continue;
    }
    if (rd.word() != "into") rd.fail("expected INTO");
    std::string name = rd.ident();
    const TableSchema* t = schema.find(name);
    if (t == nullptr) rd.fail("unknown table '" + name + "'");
    // Optional column list; unnamed columns are NULL.
    std::vector<size_t> cols;
    if (rd.eat('(')) {
      do {
        std::string c = rd.ident();
        int idx = t->column_index(c);
        if (idx < 0) rd.fail("unknown column '" + c + "' in table '" + t->name + "'");
        cols.push_back(static_cast<size_t>(idx));
      } while (rd.eat(','));
      rd.expect(')');
    }
    if (rd.word() != "values") rd.fail("expected VALUES");
    do {
      rd.expect('(');
      Tuple row;
      do {
        row.push_back(rd.literal());
      } while (rd.eat(','));
      rd.expect(')');
      if (!cols.empty()) {
        if (row.size() != cols.size()) rd.fail("row width does not match the column list");
        Tuple full(t->columns.size(), Value::null());
        for (size_t i = 0; i < cols.size(); ++i) full[cols[i]] = row[i];
        row = std::move(full);
      }
      check_row(*t, row);
      for (size_t i = 0; i < row.size(); ++i) row[i] = store(row[i], t->columns[i], t->name);
      db.tables[t->name].rows.push_back(std::move(row));
    } while (rd.eat(','));
    if (!rd.eat(';') && !rd.at_end()) rd.fail("expected ';'");
  }
  return db;
}

std::string dump_hash(const ConcreteDb& db, const DatabaseSchema& schema) {
  std::string text = dump_json(db, schema);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sqleq
