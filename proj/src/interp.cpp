// Copyright 2026 The Loomweaver Authors
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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "loomweaver/interp.h"

namespace loomweaver {
namespace {

using Env = std::map<std::string, int64_t>;

// A scalar in the evaluation context of a statement.
struct Value {
  double f = 0;
  int64_t i = 0;
};

int64_t to_int(double v) {
  if (std::isnan(v))
    return 0;
  if (v >= 9.2233720368547758e18)
    return INT64_MAX;
  if (v <= -9.2233720368547758e18)
    return INT64_MIN;
  return static_cast<int64_t>(v);
}

class Evaluator {
public:
  Evaluator(const Function &f, ArrayData &data) : data_(data) {
    for (const auto &p : f.placeholders) {
      auto it = data_.find(p.name);
      if (it == data_.end())
        throw CompileError("missing input array '" + p.name + "'");
      const Buffer &b = it->second;
      if (b.shape != p.shape || !(b.dtype == p.dtype) || b.size() != b.f.size() + b.i.size())
        throw CompileError("shape or type mismatch for array '" + p.name + "'");
    }
  }

  void execute(const std::string &stmt, const Access &dest, StmtOp op, const Expr &rhs,
               const Env &env, const std::function<std::string()> &where) {
    Buffer &out = data_.at(dest.array);
    DataType ctx = out.dtype;
    size_t at = offset(dest.array, dest.indices, env, stmt, where);
    Value v = eval(rhs, ctx, env, stmt, where);
    if (op == StmtOp::Accumulate) {
      Value cur = load(out, at, ctx);
      if (ctx.is_float())
        v.f = round_to(ctx, cur.f + v.f);
      else
        v.i = wrap_add(cur.i, v.i);
    }
    if (ctx.is_float())
      out.f[at] = round_to(ctx, v.f);
    else
      out.i[at] = wrap_to(ctx, v.i);
  }

private:
  size_t offset(const std::string &array, const std::vector<AffineExpr> &idx, const Env &env,
                const std::string &stmt, const std::function<std::string()> &where) {
    const Buffer &b = data_.at(array);
    size_t off = 0;
    std::vector<int64_t> vals;
    for (const auto &e : idx)
      vals.push_back(e.evaluate(env));
    for (size_t k = 0; k < vals.size(); ++k) {
      if (vals[k] < 0 || vals[k] >= b.shape[k]) {
        std::string cell = array;
        for (int64_t v : vals)
          cell += "[" + std::to_string(v) + "]";
        throw CompileError("out-of-bounds access " + cell + " in '" + stmt + "' at " + where());
      }
      off = off * static_cast<size_t>(b.shape[k]) + static_cast<size_t>(vals[k]);
    }
    return off;
  }

  static Value load(const Buffer &b, size_t at, const DataType &ctx) {
    Value v;
    if (ctx.is_float())
      v.f = round_to(ctx, b.dtype.is_float() ? b.f[at] : static_cast<double>(b.i[at]));
    else
      v.i = b.dtype.is_float() ? to_int(b.f[at]) : b.i[at];
    return v;
  }

  static Value from_int(int64_t x, const DataType &ctx) {
    Value v;
    if (ctx.is_float())
      v.f = round_to(ctx, static_cast<double>(x));
    else
      v.i = x;
    return v;
  }

  Value eval(const Expr &e, const DataType &ctx, const Env &env, const std::string &stmt,
             const std::function<std::string()> &where) {
    switch (e.kind) {
    case Expr::Kind::Constant:
      if (e.is_float_literal) {
        Value v;
        if (ctx.is_float())
          v.f = round_to(ctx, e.float_value);
        else
          v.i = to_int(e.float_value);
        return v;
      }
      return from_int(e.int_value, ctx);
    case Expr::Kind::Index:
      return from_int(e.index.evaluate(env), ctx);
    case Expr::Kind::Load: {
      size_t at = offset(e.array, e.indices, env, stmt, where);
      return load(data_.at(e.array), at, ctx);
    }
    case Expr::Kind::Negate: {
      Value v = eval(*e.lhs, ctx, env, stmt, where);
      v.f = -v.f;
      v.i = wrap_neg(v.i);
      return v;
    }
    case Expr::Kind::Binary: {
      Value a = eval(*e.lhs, ctx, env, stmt, where);
      Value b = eval(*e.rhs, ctx, env, stmt, where);
      Value r;
      if (ctx.is_float()) {
        switch (e.op) {
        case Expr::BinOp::Add: r.f = a.f + b.f; break;
        case Expr::BinOp::Sub: r.f = a.f - b.f; break;
        case Expr::BinOp::Mul: r.f = a.f * b.f; break;
        case Expr::BinOp::Div: r.f = a.f / b.f; break;
        }
        r.f = round_to(ctx, r.f);
        return r;
      }
      switch (e.op) {
      case Expr::BinOp::Add: r.i = wrap_add(a.i, b.i); break;
      case Expr::BinOp::Sub: r.i = wrap_sub(a.i, b.i); break;
      case Expr::BinOp::Mul: r.i = wrap_mul(a.i, b.i); break;
      case Expr::BinOp::Div:
        if (b.i == 0)
          throw CompileError("integer division by zero in '" + stmt + "' at " + where());
        r.i = (a.i == INT64_MIN && b.i == -1) ? INT64_MIN : a.i / b.i;
        break;
      }
      return r;
    }
    }
    return {};
  }

  ArrayData &data_;
};

std::string env_str(const std::vector<std::string> &names, const Env &env) {
  std::string out = "(";
  for (size_t k = 0; k < names.size(); ++k)
    out += (k ? ", " : "") + names[k] + "=" + std::to_string(env.at(names[k]));
  return out + ")";
}

void run_nodes(const std::vector<Node> &nodes, Env &env, Evaluator &ev) {
  for (const auto &n : nodes) {
    if (auto *l = std::get_if<LoopNode>(&n.value)) {
      int64_t lo = l->lower.evaluate(env, true), hi = l->upper.evaluate(env, false);
      for (int64_t v = lo; v <= hi; ++v) {
        env[l->iv] = v;
        run_nodes(l->body, env, ev);
      }
      env.erase(l->iv);
    } else if (auto *c = std::get_if<IfNode>(&n.value)) {
      bool ok = std::all_of(c->conditions.begin(), c->conditions.end(),
                            [&](const Constraint &k) { return k.holds(env); });
      if (ok)
        run_nodes(c->body, env, ev);
    } else {
      const auto &s = std::get<StmtNode>(n.value);
      auto where = [&]() {
        std::string out = "(";
        bool first = true;
        for (const auto &[it, e] : s.iter_map) {
          out += (first ? "" : ", ") + it + "=" + std::to_string(e.evaluate(env));
          first = false;
        }
        return out + ")";
      };
      ev.execute(s.name, s.dest, s.op, *s.rhs, env, where);
    }
  }
}

} // namespace

double round_to(const DataType &t, double v) {
  if (t.is_float() && t.bits == 32)
    return static_cast<double>(static_cast<float>(v));
  return v;
}

int64_t wrap_to(const DataType &t, int64_t v) {
  if (t.bits >= 64)
    return v;
  uint64_t mask = (uint64_t{1} << t.bits) - 1;
  uint64_t u = static_cast<uint64_t>(v) & mask;
  if (t.kind == ScalarKind::SignedInt && (u >> (t.bits - 1)) & 1)
    u |= ~mask;
  return static_cast<int64_t>(u);
}

Buffer Buffer::zeros(const Placeholder &p) {
  Buffer b;
  b.dtype = p.dtype;
  b.shape = p.shape;
  size_t n = static_cast<size_t>(p.num_elements());
  if (p.dtype.is_float())
    b.f.assign(n, 0.0);
  else
    b.i.assign(n, 0);
  return b;
}

size_t Buffer::size() const {
  size_t n = 1;
  for (int64_t e : shape)
    n *= static_cast<size_t>(e);
  return n;
}

ArrayData random_inputs(const Function &f, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  std::uniform_int_distribution<int64_t> integer(-8, 8);
  ArrayData data;
  for (const auto &p : f.placeholders) {
    Buffer b = Buffer::zeros(p);
    if (p.direction != ArrayDirection::Temp) {
      for (auto &x : b.f)
        x = round_to(p.dtype, real(rng));
      for (auto &x : b.i)
        x = wrap_to(p.dtype, integer(rng));
    }
    data[p.name] = std::move(b);
  }
  return data;
}

ArrayData run_reference(const Function &f, ArrayData data) {
  Evaluator ev(f, data);
  std::vector<PolyStmt> stmts = reference_statements(f);
  struct Inst {
    std::vector<int64_t> time;
    int stmt;
    Env env;
  };
  std::vector<Inst> insts;
  for (size_t s = 0; s < stmts.size(); ++s) {
    const Compute &c = f.computes[s];
    auto names = c.iter_names();
    for (const auto &p : stmts[s].domain.enumerate()) {
      Env env;
      for (size_t k = 0; k < names.size(); ++k)
        env[names[k]] = p[k];
      insts.push_back({stmts[s].time_of(env), static_cast<int>(s), std::move(env)});
    }
  }
  std::stable_sort(insts.begin(), insts.end(),
                   [](const Inst &a, const Inst &b) { return a.time < b.time; });
  for (const auto &in : insts) {
    const Compute &c = f.computes[in.stmt];
    auto names = c.iter_names();
    ev.execute(c.name, c.dest, c.op, *c.rhs, in.env,
               [&]() { return env_str(names, in.env); });
  }
  return data;
}

ArrayData run_loopir(const LoopIR &ir, const Function &f, ArrayData data) {
  Evaluator ev(f, data);
  Env env;
  run_nodes(ir.roots, env, ev);
  return data;
}

std::optional<std::string> compare_outputs(const Function &f, const ArrayData &expected,
                                           const ArrayData &actual, double rel_tol) {
  for (const auto &p : f.placeholders) {
    if (p.direction == ArrayDirection::Temp)
      continue;
    auto e = expected.find(p.name), a = actual.find(p.name);
    if (e == expected.end() || a == actual.end())
      return "array '" + p.name + "' missing from results";
    const Buffer &x = e->second, &y = a->second;
    if (x.size() != y.size() || x.f.size() != y.f.size() || x.i.size() != y.i.size())
      return "array '" + p.name + "' has mismatched size";
    for (size_t k = 0; k < x.i.size(); ++k)
      if (x.i[k] != y.i[k])
        return p.name + "[" + std::to_string(k) + "]: expected " + std::to_string(x.i[k]) +
               ", got " + std::to_string(y.i[k]);
    for (size_t k = 0; k < x.f.size(); ++k) {
      double u = x.f[k], v = y.f[k];
      if (std::isnan(u) && std::isnan(v))
        continue;
      bool same = rel_tol == 0 ? u == v
                               : (u == v || std::fabs(u - v) <=
                                                rel_tol * std::max(std::fabs(u), std::fabs(v)));
      if (!same)
        return p.name + "[" + std::to_string(k) + "]: expected " + format_float_literal(u) +
               ", got " + format_float_literal(v);
    }
  }
  return std::nullopt;
}

} // namespace loomweaver
