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

#include "sqleq/oracle.hpp"

#include <limits>
#include <set>

#include "sqleq/evaluator.hpp"

namespace sqleq {

namespace {

constexpr uint64_t kSaturated = std::numeric_limits<uint64_t>::max();

uint64_t mul_sat(uint64_t a, uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

uint64_t add_sat(uint64_t a, uint64_t b) { return b > kSaturated - a ? kSaturated : a + b; }

std::vector<Value> cell_pool(const DomainSpec& spec, const TableSchema& t, size_t col) {
  std::vector<Value> pool;
  const ColumnSchema& c = t.columns[col];
  if (c.nullable && !t.is_key_column(col)) pool.push_back(Value::null());
  switch (c.type) {
    case SqlType::Int:
      for (auto v : spec.ints) pool.push_back(Value::integer(v));
      break;
    case SqlType::Str:
      for (const auto& s : spec.strs) pool.push_back(Value::str(s));
      break;
    case SqlType::Date:
      for (const auto& d : spec.dates) pool.push_back(Value::date(d));
      break;
  }
  return pool;
}

// All row sequences of one table, addressed by index: lengths 0..k in
// order, then the rows as base-R digits (first row most significant).
struct TableSpace {
  const TableSchema* table = nullptr;
  std::vector<std::vector<Value>> pools;
  uint64_t rows_per_slot = 1;  // R
  std::vector<uint64_t> by_length;  // R^n for n = 0..k
  uint64_t total = 0;

  Relation decode(uint64_t index) const {
    Relation r;
    r.arity = pools.size();
    size_t n = 0;
    while (index >= by_length[n]) {
      index -= by_length[n];
      ++n;
    }
    std::vector<uint64_t> digits(n);
    for (size_t i = n; i-- > 0;) {
      digits[i] = index % rows_per_slot;
      index /= rows_per_slot;
    }
    for (uint64_t d : digits) {
      Tuple row(pools.size());
      for (size_t c = pools.size(); c-- > 0;) {
        row[c] = pools[c][d % pools[c].size()];
        d /= pools[c].size();
      }
      r.rows.push_back(std::move(row));
    }
    return r;
  }
};

std::vector<TableSpace> spaces(const DatabaseSchema& schema, const DomainSpec& spec) {
  std::vector<TableSpace> out;
  for (const auto& t : schema.tables) {
    TableSpace s;
    s.table = &t;
    for (size_t c = 0; c < t.columns.size(); ++c) {
      s.pools.push_back(cell_pool(spec, t, c));
      s.rows_per_slot = mul_sat(s.rows_per_slot, s.pools.back().size());
    }
    uint64_t p = 1;
    for (int n = 0; n <= spec.k; ++n) {
      s.by_length.push_back(p);
      s.total = add_sat(s.total, p);
      p = mul_sat(p, s.rows_per_slot);
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool keys_distinct(const TableSchema& t, const Relation& r) {
  if (t.primary_key.empty()) return true;
  std::vector<size_t> cols;
  for (const auto& k : t.primary_key) cols.push_back(static_cast<size_t>(t.column_index(k)));
  std::set<std::string> seen;
  for (const auto& row : r.rows) {
    std::string key;
    for (size_t c : cols) key += identity_key(row[c]) + "\x1f";
    if (!seen.insert(key).second) return false;
  }
  return true;
}

}  // namespace

void DomainSpec::validate() const {
  if (ints.empty() || strs.empty() || dates.empty()) throw std::invalid_argument("value pools must be non-empty");
  for (const auto& d : dates) {
    if (!is_valid_date(d.year, d.month, d.day)) throw std::invalid_argument("invalid date in pool");
  }
  if (k < 0) throw std::invalid_argument("k must be non-negative");
}

ValuePools to_pools(const DomainSpec& spec) {
  ValuePools p;
  p.ints = spec.ints;
  p.strs = spec.strs;
  p.dates = spec.dates;
  p.include_null = true;
  return p;
}

uint64_t candidate_count(const DatabaseSchema& schema, const DomainSpec& spec) {
  uint64_t total = 1;
  for (const auto& s : spaces(schema, spec)) total = mul_sat(total, s.total);
  return total;
}

uint64_t enumerate_dbs(const DatabaseSchema& schema, const DomainSpec& spec,
                       const std::function<bool(const ConcreteDb&)>& visit) {
  spec.validate();
  std::vector<TableSpace> sp = spaces(schema, spec);
  uint64_t total = 1;
  for (const auto& s : sp) total = mul_sat(total, s.total);
  if (total > spec.ceiling) {
    throw CeilingExceeded(std::to_string(total) + " candidate databases exceed the ceiling of " +
                          std::to_string(spec.ceiling));
  }
  uint64_t visited = 0;
  std::vector<uint64_t> idx(sp.size(), 0);
  for (uint64_t n = 0; n < total; ++n) {
    // Odometer, last table fastest.
    uint64_t rest = n;
    for (size_t t = sp.size(); t-- > 0;) {
      idx[t] = rest % sp[t].total;
      rest /= sp[t].total;
    }
    ConcreteDb db;
    bool ok = true;
    for (size_t t = 0; t < sp.size() && ok; ++t) {
      Relation r = sp[t].decode(idx[t]);
      ok = keys_distinct(*sp[t].table, r);
      db.tables.emplace(sp[t].table->name, std::move(r));
    }
    if (!ok) continue;
    ++visited;
    if (!visit(db)) break;
  }
  return visited;
}

OracleVerdict oracle_check(const DatabaseSchema& schema, const Query& q1, const Query& q2, const DomainSpec& spec,
                           bool exclude_degenerate) {
  OracleVerdict out;
  out.checked = enumerate_dbs(schema, spec, [&](const ConcreteDb& db) {
    Relation a = eval_query(db, q1);
    Relation b = eval_query(db, q2);
    bool same = (a.arity == b.arity || (a.empty() && b.empty())) && same_row_set(a, b);
    if (same) return true;
    if (exclude_degenerate && is_degenerate_pair(a, b)) return true;
    out.equivalent = false;
    out.witness = db;
    return false;
  });
  return out;
}

}  // namespace sqleq
