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
#include <functional>

#include "loomweaver/depgraph.h"

namespace loomweaver {
namespace {

using Cell = std::pair<std::string, std::vector<int64_t>>;

std::vector<int64_t> eval_indices(const std::vector<AffineExpr> &idx,
                                  const std::map<std::string, int64_t> &env) {
  std::vector<int64_t> out;
  out.reserve(idx.size());
  for (const auto &e : idx)
    out.push_back(e.evaluate(env));
  return out;
}

struct InstanceAccess {
  Cell write;
  std::vector<Cell> reads;
};

InstanceAccess accesses(const Compute &c, const std::map<std::string, int64_t> &env) {
  InstanceAccess a;
  a.write = {c.dest.array, eval_indices(c.dest.indices, env)};
  if (c.op == StmtOp::Accumulate)
    a.reads.push_back(a.write);
  for_each_load(*c.rhs, [&](const Expr &l) {
    a.reads.push_back({l.array, eval_indices(l.indices, env)});
  });
  return a;
}

bool lex_negative(const std::vector<int64_t> &v) {
  for (int64_t x : v)
    if (x != 0)
      return x < 0;
  return false;
}

bool is_zero(const std::vector<int64_t> &v) {
  return std::all_of(v.begin(), v.end(), [](int64_t x) { return x == 0; });
}

// Linear part of each index row, constants stripped.
std::vector<AffineExpr> linear_rows(const std::vector<AffineExpr> &idx) {
  std::vector<AffineExpr> rows;
  for (auto e : idx) {
    e.set_constant(0);
    rows.push_back(e);
  }
  return rows;
}

// Solves rows * d = rhs for d over `dims`. Returns nullopt for "no integer
// solution"; sets `unique` to false when the system does not pin every dim.
std::optional<std::vector<int64_t>> solve_uniform(const std::vector<AffineExpr> &rows,
                                                  const std::vector<int64_t> &rhs,
                                                  const std::vector<std::string> &dims,
                                                  bool &unique) {
  std::map<std::string, int64_t> value;
  unique = true;
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto &co = rows[r].coeffs();
    if (co.empty()) {
      if (rhs[r] != 0)
        return std::nullopt;
      continue;
    }
    if (co.size() > 1) {
      unique = false;
      continue;
    }
    auto [name, a] = *co.begin();
    if (rhs[r] % a != 0)
      return std::nullopt;
    int64_t v = rhs[r] / a;
    auto it = value.find(name);
    if (it != value.end() && it->second != v)
      return std::nullopt;
    value[name] = v;
  }
  std::vector<int64_t> d;
  for (const auto &n : dims) {
    auto it = value.find(n);
    if (it == value.end()) {
      unique = false;
      d.push_back(0);
    } else {
      d.push_back(it->second);
    }
  }
  return d;
}

SelfDependence make_dep(std::vector<int64_t> entries, bool known, std::string array,
                        int load_index, bool reduction) {
  SelfDependence s;
  s.distance = {std::move(entries), known};
  s.direction = direction_of(s.distance);
  s.array = std::move(array);
  s.load_index = load_index;
  s.reduction = reduction;
  return s;
}

std::vector<std::vector<int64_t>> clamped_points(const Compute &c, int64_t clamp) {
  std::vector<IterVar> iters = c.iters;
  int64_t total = 1;
  for (auto &it : iters) {
    it.upper = std::min(it.upper, it.lower + clamp);
    total *= std::max<int64_t>(it.extent(), 0);
    if (total > 1000000)
      throw CompileError("clamped domain of '" + c.name + "' exceeds 10^6 points");
  }
  return IntegerSet::box(iters).enumerate();
}

} // namespace

DirectionVector direction_of(const DistanceVector &d) {
  DirectionVector v;
  for (int64_t x : d.entries)
    v.entries.push_back(!d.known ? '*' : x > 0 ? '<' : x == 0 ? '=' : '>');
  return v;
}

NodeAttr analyze_node(const Compute &c) {
  NodeAttr attr;
  std::vector<std::string> dims = c.iter_names();
  int depth = static_cast<int>(dims.size());
  auto dest_uses = [&](const std::string &d) {
    for (const auto &e : c.dest.indices)
      if (e.depends_on(d))
        return true;
    return false;
  };

  if (c.op == StmtOp::Accumulate) {
    for (int k = 0; k < depth; ++k)
      if (!dest_uses(dims[k]))
        attr.reduction_dims.insert(k);
    if (!attr.reduction_dims.empty()) {
      std::vector<int64_t> d(depth, 0);
      d[*attr.reduction_dims.rbegin()] = 1;
      attr.self_deps.push_back(make_dep(d, true, c.dest.array, -1, true));
    }
  }

  auto wrow = linear_rows(c.dest.indices);
  bool dest_injective = true;
  {
    bool unique = true;
    std::vector<int64_t> zero(wrow.size(), 0);
    solve_uniform(wrow, zero, dims, unique);
    dest_injective = unique;
  }
  // Plain assignments through a non-injective destination overwrite cells.
  if (c.op == StmtOp::Assign && !dest_injective)
    attr.self_deps.push_back(
        make_dep(std::vector<int64_t>(depth, 0), false, c.dest.array, -1, false));

  int load_index = -1;
  for_each_load(*c.rhs, [&](const Expr &l) {
    ++load_index;
    if (l.array != c.dest.array)
      return;
    auto rrow = linear_rows(l.indices);
    if (rrow != wrow) {
      attr.self_deps.push_back(
          make_dep(std::vector<int64_t>(depth, 0), false, l.array, load_index, false));
      return;
    }
    std::vector<int64_t> rhs;
    for (size_t r = 0; r < l.indices.size(); ++r)
      rhs.push_back(c.dest.indices[r].constant() - l.indices[r].constant());
    bool unique = true;
    auto d = solve_uniform(wrow, rhs, dims, unique);
    if (!d)
      return; // never the same cell
    if (!unique) {
      attr.self_deps.push_back(
          make_dep(std::vector<int64_t>(depth, 0), false, l.array, load_index, false));
      return;
    }
    if (is_zero(*d))
      return; // read and write in the same instance
    if (lex_negative(*d))
      for (auto &x : *d)
        x = -x;
    attr.self_deps.push_back(make_dep(*d, true, l.array, load_index, false));
  });
  return attr;
}

std::vector<int> coarse_order(const Function &f) {
  std::vector<PolyStmt> stmts = reference_statements(f);
  std::vector<int> order(stmts.size());
  for (size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return stmts[a].schedule.statics < stmts[b].schedule.statics;
  });
  return order;
}

DepGraph build_dep_graph(const Function &f) {
  DepGraph g;
  for (const auto &c : f.computes) {
    g.nodes.push_back(c.name);
    g.depths.push_back(c.depth());
    g.attrs.push_back(analyze_node(c));
  }
  g.exec_order = coarse_order(f);

  std::map<std::string, int> last_writer;
  std::map<std::string, std::vector<int>> writers;
  std::set<std::pair<int, std::string>> read_by;
  std::set<DepEdge> edges;
  for (int ci : g.exec_order) {
    const Compute &c = f.computes[ci];
    std::set<std::string> reads;
    if (c.op == StmtOp::Accumulate)
      reads.insert(c.dest.array);
    for_each_load(*c.rhs, [&](const Expr &l) { reads.insert(l.array); });
    for (const auto &a : reads) {
      read_by.insert({ci, a});
      auto it = last_writer.find(a);
      if (it != last_writer.end())
        edges.insert({it->second, ci, a});
    }
    last_writer[c.dest.array] = ci;
    writers[c.dest.array].push_back(ci);
  }
  for (const auto &[array, ws] : writers)
    for (size_t i = 1; i < ws.size(); ++i)
      // A writer that also reads the array extends the earlier value.
      if (!read_by.count({ws[i], array}))
        g.warnings.push_back(warning("computes '" + f.computes[ws[i - 1]].name + "' and '" +
                                   f.computes[ws[i]].name + "' both write '" + array +
                                   "'; the later writer supplies subsequent readers"));
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

std::vector<std::vector<int>> collect_paths(const DepGraph &g) {
  size_t n = g.nodes.size();
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indeg(n, 0);
  for (const auto &e : g.edges) {
    succ[e.producer].push_back(e.consumer);
    ++indeg[e.consumer];
  }
  for (auto &s : succ) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> color(n, 0);
  std::function<void(int)> check = [&](int v) {
    color[v] = 1;
    for (int w : succ[v]) {
      if (color[w] == 1)
        throw CompileError("dependence cycle through '" + g.nodes[w] + "'");
      if (color[w] == 0)
        check(w);
    }
    color[v] = 2;
  };
  for (size_t v = 0; v < n; ++v)
    if (color[v] == 0)
      check(static_cast<int>(v));

  std::vector<std::vector<int>> paths;
  std::vector<int> cur;
  std::function<void(int)> dfs = [&](int v) {
    cur.push_back(v);
    if (succ[v].empty())
      paths.push_back(cur);
    for (int w : succ[v])
      dfs(w);
    cur.pop_back();
  };
  for (size_t v = 0; v < n; ++v)
    if (indeg[v] == 0)
      dfs(static_cast<int>(v));
  return paths;
}

Function clamp_function(const Function &f, int64_t cap) {
  Function r = f;
  auto clamp = [cap](IterVar &it) { it.upper = std::min(it.upper, it.lower + cap); };
  for (auto &it : r.iters)
    clamp(it);
  for (auto &c : r.computes)
    for (auto &it : c.iters)
      clamp(it);
  return r;
}

std::set<InstancePair> brute_force_dependences(const Compute &c, int64_t clamp) {
  auto points = clamped_points(c, clamp);
  std::vector<std::string> dims = c.iter_names();
  // Per cell: (instance position, is write) in execution order.
  std::map<Cell, std::vector<std::pair<size_t, bool>>> touches;
  for (size_t p = 0; p < points.size(); ++p) {
    std::map<std::string, int64_t> env;
    for (size_t k = 0; k < dims.size(); ++k)
      env[dims[k]] = points[p][k];
    InstanceAccess a = accesses(c, env);
    for (const auto &r : a.reads)
      touches[r].push_back({p, false});
    touches[a.write].push_back({p, true});
  }
  std::set<InstancePair> out;
  for (const auto &[cell, list] : touches) {
    for (size_t x = 0; x < list.size(); ++x)
      for (size_t y = x + 1; y < list.size(); ++y) {
        if (!list[x].second && !list[y].second)
          continue;
        if (list[x].first == list[y].first)
          continue;
        out.insert({points[list[x].first], points[list[y].first]});
      }
  }
  return out;
}

std::set<DepEdge> brute_force_edges(const Function &f, int64_t clamp) {
  Function cf = clamp_function(f, clamp);
  std::vector<PolyStmt> stmts = reference_statements(cf);
  std::vector<int> order = coarse_order(cf);
  std::vector<int> rank(order.size());
  for (size_t i = 0; i < order.size(); ++i)
    rank[order[i]] = static_cast<int>(i);

  struct Inst {
    std::vector<int64_t> time;
    int stmt;
    std::map<std::string, int64_t> env;
  };
  std::vector<Inst> insts;
  for (size_t s = 0; s < cf.computes.size(); ++s) {
    const Compute &c = cf.computes[s];
    auto dims = c.iter_names();
    for (const auto &p : clamped_points(c, clamp)) {
      std::map<std::string, int64_t> env;
      for (size_t k = 0; k < dims.size(); ++k)
        env[dims[k]] = p[k];
      insts.push_back({stmts[s].time_of(env), static_cast<int>(s), env});
    }
  }
  std::stable_sort(insts.begin(), insts.end(),
                   [](const Inst &a, const Inst &b) { return a.time < b.time; });

  // Per cell: compute -> position of its latest write.
  std::map<Cell, std::map<int, size_t>> writes;
  std::set<DepEdge> out;
  for (size_t t = 0; t < insts.size(); ++t) {
    const Inst &in = insts[t];
    InstanceAccess a = accesses(cf.computes[in.stmt], in.env);
    for (const auto &r : a.reads) {
      auto it = writes.find(r);
      if (it == writes.end())
        continue;
      int best = -1;
      size_t best_time = 0;
      for (const auto &[w, when] : it->second) {
        if (w == in.stmt || rank[w] > rank[in.stmt])
          continue;
        if (best < 0 || when > best_time) {
          best = w;
          best_time = when;
        }
      }
      if (best >= 0)
        out.insert({best, in.stmt, r.first});
    }
    writes[a.write][in.stmt] = t;
  }
  return out;
}

} // namespace loomweaver
