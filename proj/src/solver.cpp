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

#include "sqleq/solver.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <unistd.h>

namespace sqleq {

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat:
      return "sat";
    case SolveStatus::Unsat:
      return "unsat";
    case SolveStatus::Timeout:
      return "timeout";
    case SolveStatus::Unknown:
      return "unknown";
  }
  return "?";
}

namespace {

class Watchdog {
 public:
  Watchdog(z3::context& ctx, double seconds) : ctx_(ctx) {
    thread_ = std::thread([this, seconds] {
      std::unique_lock<std::mutex> lock(mu_);
      auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
      if (!cv_.wait_until(lock, deadline, [this] { return done_; })) {
        fired_ = true;
        ctx_.interrupt();
      }
    });
  }
  ~Watchdog() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
  bool fired() {
    std::lock_guard<std::mutex> lock(mu_);
    return fired_;
  }

 private:
  z3::context& ctx_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool done_ = false;
  bool fired_ = false;
  std::thread thread_;
};

// The memory limit is a process-wide solver parameter.
void set_memory_limit(uint64_t bytes) {
  static std::mutex mu;
  static uint64_t current = 0;
  std::lock_guard<std::mutex> lock(mu);
  if (bytes == current) return;
  // Never above 3/4 of physical memory: past that the process is killed
  // before the solver notices.
  long pages = sysconf(_SC_PHYS_PAGES), page = sysconf(_SC_PAGE_SIZE);
  uint64_t cap = pages > 0 && page > 0 ? static_cast<uint64_t>(pages) * static_cast<uint64_t>(page) / 4 * 3 : bytes;
  uint64_t mb = std::max<uint64_t>(1, std::min<uint64_t>(std::min(bytes, cap) >> 20, uint64_t{1} << 30));
  z3::set_param("memory_max_size", static_cast<int>(mb));
  current = bytes;
}

}  // namespace

SolveResult solve(z3::context& ctx, const std::vector<z3::expr>& assertions, const SolveBudget& budget,
                  const std::vector<z3::expr>& extra) {
  SolveResult out;
  auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    if (budget.memory_bytes > 0) set_memory_limit(budget.memory_bytes);
    z3::solver s(ctx);
    z3::params p(ctx);
    double ms = budget.cpu_seconds * 1000.0;
    p.set("timeout", static_cast<unsigned>(std::clamp(ms, 1.0, 4.0e9)));
    s.set(p);
    for (const auto& a : assertions) s.add(a);
    for (const auto& a : extra) s.add(a);
    z3::check_result r;
    bool fired = false;
    {
      Watchdog dog(ctx, budget.cpu_seconds);
      r = s.check();
      fired = dog.fired();
    }
    out.seconds = elapsed();
    if (r == z3::sat) {
      out.status = SolveStatus::Sat;
      out.model = s.get_model();
    } else if (r == z3::unsat) {
      out.status = SolveStatus::Unsat;
    } else {
      out.reason = s.reason_unknown();
      bool timed = fired || out.reason.find("timeout") != std::string::npos ||
                   out.reason.find("canceled") != std::string::npos ||
                   out.reason.find("interrupted") != std::string::npos || out.seconds >= budget.cpu_seconds;
      out.status = timed ? SolveStatus::Timeout : SolveStatus::Unknown;
    }
  } catch (const z3::exception& e) {
    out.seconds = elapsed();
    out.status = out.seconds >= budget.cpu_seconds ? SolveStatus::Timeout : SolveStatus::Unknown;
    out.reason = e.msg();
  }
  return out;
}

namespace {

// Model evaluation can leave ground terms over constants (string
// comparisons in particular) unreduced; simplify those.
z3::expr ground(const z3::expr& e) {
  if (e.is_numeral() || e.is_true() || e.is_false() || e.is_string_value()) return e;
  return e.simplify();
}

int64_t int_of(const z3::expr& raw) {
  z3::expr e = ground(raw);
  int64_t v = 0;
  if (!e.is_numeral_i64(v)) throw DecodeError("non-integer model value: " + e.to_string());
  return v;
}

bool bool_of(const z3::expr& raw) {
  z3::expr e = ground(raw);
  if (e.is_true()) return true;
  if (e.is_false()) return false;
  throw DecodeError("non-boolean model value: " + e.to_string());
}

std::string str_of(z3::context& ctx, const z3::expr& raw) {
  z3::expr e = ground(raw);
  if (!e.is_string_value()) throw DecodeError("non-string model value: " + e.to_string());
  unsigned n = 0;
  const char* p = Z3_get_lstring(ctx, e, &n);
  return std::string(p, n);
}

Value value_of(const z3::model& model, const SymValue& v, ExprType type) {
  z3::context& ctx = model.ctx();
  auto ev = [&](const z3::expr& e) { return model.eval(e, true); };
  if (type == ExprType::Null || bool_of(ev(v.null))) return Value::null();
  switch (type) {
    case ExprType::Int:
    case ExprType::Bool:
      return Value::integer(int_of(ev(v.num)));
    case ExprType::Real: {
      z3::expr r = ground(ev(v.num));
      int64_t num = 0, den = 1;
      if (!r.is_numeral() || !Z3_get_numeral_int64(ctx, Z3_get_numerator(ctx, r), &num) ||
          !Z3_get_numeral_int64(ctx, Z3_get_denominator(ctx, r), &den)) {
        throw DecodeError("non-rational model value: " + r.to_string());
      }
      return Value::real(Rational(num, den));
    }
    case ExprType::Str:
      return Value::str(str_of(ctx, ev(v.num)));
    case ExprType::Date: {
      Date d{int_of(ev(v.y)), int_of(ev(v.m)), int_of(ev(v.d))};
      if (!is_valid_date(d.year, d.month, d.day)) throw DecodeError("model holds an invalid date");
      return Value::date(d);
    }
    default:
      return Value::null();
  }
}

}  // namespace

Relation decode_relation(const z3::model& model, const SymRelation& r) {
  Relation out;
  out.arity = r.arity();
  for (const auto& t : r.tuples) {
    if (bool_of(model.eval(t.del, true))) continue;
    Tuple row;
    for (size_t i = 0; i < t.values.size(); ++i) row.push_back(value_of(model, t.values[i], r.types[i]));
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<z3::expr> fix_database(const SymDb& db, const ConcreteDb& concrete) {
  std::vector<z3::expr> out;
  for (const auto& [name, sym] : db.tables) {
    const Relation& rel = concrete.table(name);
    if (rel.size() > sym.tuples.size()) {
      throw DecodeError("table '" + name + "' has more rows than the bound");
    }
    for (size_t i = 0; i < sym.tuples.size(); ++i) {
      const SymTuple& t = sym.tuples[i];
      if (i >= rel.size()) {
        out.push_back(t.del);
        continue;
      }
      out.push_back(!t.del);
      for (size_t c = 0; c < t.values.size(); ++c) {
        const SymValue& v = t.values[c];
        const Value& x = rel.rows[i][c];
        z3::context& ctx = v.null.ctx();
        if (x.is_null()) {
          out.push_back(v.null);
          continue;
        }
        out.push_back(!v.null);
        switch (x.kind()) {
          case ValueKind::Int:
            out.push_back(v.num == ctx.int_val(x.as_int()));
            break;
          case ValueKind::Str:
            out.push_back(v.num == ctx.string_val(x.as_str().data(), static_cast<unsigned>(x.as_str().size())));
            break;
          case ValueKind::Date:
            out.push_back(v.y == ctx.int_val(x.as_date().year) && v.m == ctx.int_val(x.as_date().month) &&
                          v.d == ctx.int_val(x.as_date().day));
            break;
          default:
            throw DecodeError("unsupported cell value " + x.to_string());
        }
      }
    }
  }
  return out;
}

ConcreteDb decode_database(const z3::model& model, const SymDb& db) {
  if (db.schema == nullptr) throw DecodeError("symbolic database without a schema");
  z3::context& ctx = model.ctx();
  auto ev = [&](const z3::expr& e) { return model.eval(e, true); };
  ConcreteDb out;
  for (const auto& table : db.schema->tables) {
    auto it = db.tables.find(table.name);
    if (it == db.tables.end()) throw DecodeError("missing symbolic table '" + table.name + "'");
    Relation rel;
    rel.arity = table.columns.size();
    for (const auto& t : it->second.tuples) {
      if (bool_of(ev(t.del))) continue;
      Tuple row;
      for (size_t ci = 0; ci < t.values.size(); ++ci) {
        const SymValue& v = t.values[ci];
        if (bool_of(ev(v.null))) {
          row.push_back(Value::null());
          continue;
        }
        switch (table.columns[ci].type) {
          case SqlType::Int:
            row.push_back(Value::integer(int_of(ev(v.num))));
            break;
          case SqlType::Str:
            row.push_back(Value::str(str_of(ctx, ev(v.num))));
            break;
          case SqlType::Date: {
            Date d{int_of(ev(v.y)), int_of(ev(v.m)), int_of(ev(v.d))};
            if (!is_valid_date(d.year, d.month, d.day)) throw DecodeError("model holds an invalid date");
            row.push_back(Value::date(d));
            break;
          }
        }
      }
      rel.rows.push_back(std::move(row));
    }
    out.tables.emplace(table.name, std::move(rel));
  }
  return out;
}

z3::expr blocking_clause(z3::context& ctx, const z3::model& model, const SymDb& db) {
  z3::expr_vector diff(ctx);
  for (const auto& v : db.vars) diff.push_back(v != model.eval(v, true));
  if (diff.empty()) return ctx.bool_val(false);
  return z3::mk_or(diff);
}

std::string to_smtlib(z3::context& ctx, const std::vector<z3::expr>& assertions) {
  z3::solver s(ctx);
  for (const auto& a : assertions) s.add(a);
  return s.to_smt2();
}

}  // namespace sqleq
