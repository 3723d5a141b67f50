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
#include <set>

#include "loomweaver/polyhedral.h"

namespace loomweaver {
namespace {

[[noreturn]] void fail(const std::string &msg) { throw CompileError(msg); }

void require_dim(const PolyStmt &s, const std::string &dim) {
  if (s.dim_position(dim) < 0)
    fail("unknown loop '" + dim + "' in compute '" + s.name + "'");
}

void require_fresh(const PolyStmt &s, const std::string &name,
                   const std::set<std::string> &replaced = {}) {
  if (name.empty())
    fail("empty loop name");
  if (!replaced.count(name) && s.dim_position(name) >= 0)
    fail("loop name '" + name + "' already exists in compute '" + s.name + "'");
}

void require_unannotated(const PolyStmt &s, const std::string &dim) {
  for (const auto &a : s.annotations)
    if (a.dim == dim)
      fail("directive on loop '" + dim + "' of '" + s.name +
           "' is invalidated by a later transformation");
}

// Split without the factor >= 2 restriction; tile accepts factor 1.
PolyStmt split_impl(const PolyStmt &s, const std::string &dim, int64_t factor,
                    const std::string &outer, const std::string &inner) {
  require_dim(s, dim);
  if (factor < 1)
    fail("split factor must be positive");
  if (outer == inner)
    fail("split names must differ");
  require_fresh(s, outer);
  require_fresh(s, inner);
  require_unannotated(s, dim);
  int p = s.dim_position(dim);
  PolyStmt r = s;
  AffineExpr value = AffineExpr::var(outer, factor) + AffineExpr::var(inner);
  r.domain = s.domain.substitute(dim, value);
  r.domain.dims[p] = inner;
  r.domain.dims.insert(r.domain.dims.begin() + p, outer);
  r.domain.add_ge(AffineExpr::var(inner));
  r.domain.add_ge(AffineExpr(factor - 1) - AffineExpr::var(inner));
  r.domain = r.domain.normalized();
  r.schedule.loops[p] = AffineExpr::var(inner);
  r.schedule.loops.insert(r.schedule.loops.begin() + p, AffineExpr::var(outer));
  r.schedule.statics.insert(r.schedule.statics.begin() + p + 1, 0);
  for (auto &[name, e] : r.orig_subst)
    e = e.substitute(dim, value);
  r.steps.push_back({DimStep::Kind::Split, dim, "", outer, inner, factor});
  return r;
}

} // namespace

int PolyStmt::dim_position(const std::string &dim) const {
  auto it = std::find(domain.dims.begin(), domain.dims.end(), dim);
  return it == domain.dims.end() ? -1 : static_cast<int>(it - domain.dims.begin());
}

std::map<std::string, int64_t> apply_steps(const std::vector<DimStep> &steps,
                                           std::map<std::string, int64_t> values) {
  for (const auto &st : steps) {
    if (st.kind == DimStep::Kind::Split) {
      int64_t v = values.at(st.src_a);
      values.erase(st.src_a);
      values[st.dst_a] = floor_div(v, st.factor);
      values[st.dst_b] = floor_mod(v, st.factor);
    } else {
      int64_t vi = values.at(st.src_a);
      int64_t vj = values.at(st.src_b);
      values.erase(st.src_a);
      values.erase(st.src_b);
      values[st.dst_a] = vi;
      values[st.dst_b] = wrap_add(wrap_mul(st.factor, vi), vj);
    }
  }
  return values;
}

std::map<std::string, int64_t>
PolyStmt::forward(const std::map<std::string, int64_t> &orig) const {
  return apply_steps(steps, orig);
}

std::vector<int64_t> PolyStmt::time_of(const std::map<std::string, int64_t> &orig) const {
  return schedule.tuple(forward(orig));
}

PolyStmt lift(const Compute &c, int order_index) {
  PolyStmt s;
  s.name = c.name;
  s.compute_index = order_index;
  s.body = c;
  s.domain = IntegerSet::box(c.iters).normalized();
  s.schedule.statics.assign(c.iters.size() + 1, 0);
  s.schedule.statics[0] = order_index;
  for (const auto &it : c.iters) {
    s.schedule.loops.push_back(AffineExpr::var(it.name));
    s.orig_subst[it.name] = AffineExpr::var(it.name);
  }
  return s;
}

PolyStmt interchange(const PolyStmt &s, const std::string &a, const std::string &b) {
  require_dim(s, a);
  require_dim(s, b);
  PolyStmt r = s;
  int pa = s.dim_position(a), pb = s.dim_position(b);
  std::swap(r.domain.dims[pa], r.domain.dims[pb]);
  std::swap(r.schedule.loops[pa], r.schedule.loops[pb]);
  return r;
}

PolyStmt split(const PolyStmt &s, const std::string &dim, int64_t factor,
               const std::string &outer, const std::string &inner) {
  if (factor < 2)
    fail("split factor must be at least 2");
  return split_impl(s, dim, factor, outer, inner);
}

PolyStmt permute(const PolyStmt &s, const std::vector<std::string> &order) {
  std::vector<std::string> a = order, b = s.domain.dims;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b)
    fail("loop order for '" + s.name + "' is not a permutation of its loops");
  PolyStmt r = s;
  r.domain.dims = order;
  for (size_t k = 0; k < order.size(); ++k)
    r.schedule.loops[k] = AffineExpr::var(order[k]);
  return r;
}

PolyStmt tile(const PolyStmt &s, const std::string &i, const std::string &j, int64_t ti,
              int64_t tj, const std::string &i0, const std::string &j0, const std::string &i1,
              const std::string &j1) {
  require_dim(s, i);
  require_dim(s, j);
  if (i == j)
    fail("tile needs two distinct loops");
  std::set<std::string> names{i0, j0, i1, j1};
  if (names.size() != 4)
    fail("tile names must be distinct");
  int at = std::min(s.dim_position(i), s.dim_position(j));
  PolyStmt r = split_impl(s, i, ti, i0, i1);
  r = split_impl(r, j, tj, j0, j1);
  std::vector<std::string> order;
  for (const auto &d : r.domain.dims)
    if (!names.count(d))
      order.push_back(d);
  order.insert(order.begin() + at, {i0, j0, i1, j1});
  return permute(r, order);
}

PolyStmt skew(const PolyStmt &s, const std::string &i, const std::string &j, int64_t t1,
              int64_t t2, const std::string &ni, const std::string &nj) {
  if (t2 != 1)
    fail("unsupported skew: second factor must be 1 (got " + std::to_string(t2) + ")");
  require_dim(s, i);
  require_dim(s, j);
  int pi = s.dim_position(i), pj = s.dim_position(j);
  if (pi >= pj)
    fail("skew requires '" + i + "' outside '" + j + "'");
  if (ni == nj)
    fail("skew names must differ");
  require_fresh(s, ni, {i, j});
  require_fresh(s, nj, {i, j});
  if (ni != i)
    require_unannotated(s, i);
  require_unannotated(s, j);
  std::map<std::string, AffineExpr> subst{
      {i, AffineExpr::var(ni)}, {j, AffineExpr::var(nj) - AffineExpr::var(ni, t1)}};
  PolyStmt r = s;
  for (auto &c : r.domain.constraints)
    c.expr = c.expr.substitute(subst);
  r.domain.dims[pi] = ni;
  r.domain.dims[pj] = nj;
  r.domain = r.domain.normalized();
  r.schedule.loops[pi] = AffineExpr::var(ni);
  r.schedule.loops[pj] = AffineExpr::var(nj);
  for (auto &[name, e] : r.orig_subst)
    e = e.substitute(subst);
  r.steps.push_back({DimStep::Kind::Skew, i, j, ni, nj, t1});
  return r;
}

namespace {

// Dense outermost statics; a statement moved into another nest leaves a gap.
void compact_roots(std::vector<PolyStmt> &stmts) {
  std::set<int64_t> used;
  for (const auto &s : stmts)
    used.insert(s.schedule.statics[0]);
  std::map<int64_t, int64_t> rank;
  for (int64_t v : used)
    rank.emplace(v, static_cast<int64_t>(rank.size()));
  for (auto &s : stmts)
    s.schedule.statics[0] = rank.at(s.schedule.statics[0]);
}

} // namespace

void order_after(std::vector<PolyStmt> &stmts, size_t first, size_t second,
                 const std::string &level) {
  if (first == second)
    fail("compute '" + stmts[first].name + "' cannot be ordered after itself");
  PolyStmt &s1 = stmts[first];
  const PolyStmt &s2 = stmts[second];
  if (level.empty()) {
    int64_t slot = s2.schedule.statics[0] + 1;
    for (size_t t = 0; t < stmts.size(); ++t)
      if (t != first && stmts[t].schedule.statics[0] >= slot)
        ++stmts[t].schedule.statics[0];
    s1.schedule.statics[0] = slot;
    compact_roots(stmts);
    return;
  }
  int p = s2.dim_position(level);
  if (p < 0)
    fail("unknown loop '" + level + "' in compute '" + s2.name + "'");
  if (s1.depth() <= p)
    fail("compute '" + s1.name + "' has no loop at level '" + level + "'");
  for (int k = 0; k <= p; ++k)
    if (s1.domain.dims[k] != s2.domain.dims[k])
      fail("'" + s1.name + "' and '" + s2.name + "' do not share loops up to '" + level + "'");
  auto shares_prefix = [&](const PolyStmt &t) {
    if (t.depth() <= p)
      return false;
    for (int k = 0; k <= p; ++k)
      if (t.schedule.statics[k] != s2.schedule.statics[k] ||
          t.domain.dims[k] != s2.domain.dims[k])
        return false;
    return true;
  };
  int64_t slot = s2.schedule.statics[p + 1] + 1;
  for (size_t t = 0; t < stmts.size(); ++t)
    if (t != first && shares_prefix(stmts[t]) && stmts[t].schedule.statics[p + 1] >= slot)
      ++stmts[t].schedule.statics[p + 1];
  for (int k = 0; k <= p; ++k)
    s1.schedule.statics[k] = stmts[second].schedule.statics[k];
  s1.schedule.statics[p + 1] = slot;
  compact_roots(stmts);
}

namespace {

size_t find_stmt(const std::vector<PolyStmt> &stmts, const std::string &name) {
  for (size_t i = 0; i < stmts.size(); ++i)
    if (stmts[i].name == name)
      return i;
  fail("unknown compute '" + name + "'");
}

struct Applier {
  std::vector<PolyStmt> &stmts;

  PolyStmt &at(const std::string &name) { return stmts[find_stmt(stmts, name)]; }

  void operator()(const InterchangeDirective &d) {
    auto &s = at(d.compute);
    s = interchange(s, d.dim_a, d.dim_b);
  }
  void operator()(const SplitDirective &d) {
    auto &s = at(d.compute);
    s = split(s, d.dim, d.factor, d.outer, d.inner);
  }
  void operator()(const TileDirective &d) {
    auto &s = at(d.compute);
    s = tile(s, d.dim_i, d.dim_j, d.factor_i, d.factor_j, d.outer_i, d.outer_j, d.inner_i,
             d.inner_j);
  }
  void operator()(const SkewDirective &d) {
    auto &s = at(d.compute);
    s = skew(s, d.dim_i, d.dim_j, d.factor_i, d.factor_j, d.new_i, d.new_j);
  }
  void operator()(const AfterDirective &d) {
    order_after(stmts, find_stmt(stmts, d.compute), find_stmt(stmts, d.other), d.level);
  }
  void operator()(const PipelineDirective &) {}
  void operator()(const UnrollDirective &) {}
  void operator()(const PartitionDirective &) {}
  void operator()(const AutoDseDirective &) {}
};

void add_annotation(PolyStmt &s, HwAnnotation a) {
  require_dim(s, a.dim);
  for (const auto &e : s.annotations)
    if (e.kind == a.kind && e.dim == a.dim) {
      if (e.value != a.value)
        fail("conflicting directives on loop '" + a.dim + "' of '" + s.name + "'");
      return;
    }
  s.annotations.push_back(std::move(a));
}

} // namespace

void apply_directive(std::vector<PolyStmt> &stmts, const ScheduleDirective &d) {
  std::visit(Applier{stmts}, d.value);
}

void annotate(std::vector<PolyStmt> &stmts, const ScheduleDirective &d) {
  if (auto *p = std::get_if<PipelineDirective>(&d.value)) {
    if (p->ii < 1)
      fail("pipeline II must be at least 1");
    add_annotation(stmts[find_stmt(stmts, p->compute)],
                   {HwAnnotation::Kind::Pipeline, p->dim, p->ii});
  } else if (auto *u = std::get_if<UnrollDirective>(&d.value)) {
    if (u->factor < 1)
      fail("unroll factor must be at least 1");
    add_annotation(stmts[find_stmt(stmts, u->compute)],
                   {HwAnnotation::Kind::Unroll, u->dim, u->factor});
  }
}

} // namespace loomweaver

namespace loomweaver {

std::vector<PolyStmt> reference_statements(const Function &f) {
  std::vector<PolyStmt> stmts;
  std::map<std::string, std::map<std::string, std::string>> source;
  for (size_t i = 0; i < f.computes.size(); ++i) {
    stmts.push_back(lift(f.computes[i], static_cast<int>(i)));
    for (const auto &it : f.computes[i].iters)
      source[f.computes[i].name][it.name] = it.name;
  }
  auto origin = [&](const std::string &c, const std::string &d) {
    auto &m = source[c];
    auto it = m.find(d);
    return it == m.end() ? std::string() : it->second;
  };
  for (const auto &d : f.directives) {
    if (auto *s = std::get_if<SplitDirective>(&d.value)) {
      std::string o = origin(s->compute, s->dim);
      source[s->compute][s->outer] = o;
      source[s->compute][s->inner] = o;
    } else if (auto *t = std::get_if<TileDirective>(&d.value)) {
      std::string oi = origin(t->compute, t->dim_i), oj = origin(t->compute, t->dim_j);
      source[t->compute][t->outer_i] = oi;
      source[t->compute][t->inner_i] = oi;
      source[t->compute][t->outer_j] = oj;
      source[t->compute][t->inner_j] = oj;
    } else if (auto *k = std::get_if<SkewDirective>(&d.value)) {
      std::string oi = origin(k->compute, k->dim_i), oj = origin(k->compute, k->dim_j);
      source[k->compute][k->new_i] = oi;
      source[k->compute][k->new_j] = oj;
    } else if (auto *a = std::get_if<AfterDirective>(&d.value)) {
      int first = f.compute_index(a->compute), second = f.compute_index(a->other);
      if (first < 0 || second < 0 || first == second)
        continue;
      std::string level = a->level.empty() ? "" : origin(a->other, a->level);
      try {
        order_after(stmts, first, second, level);
      } catch (const CompileError &) {
        // Loops are not shared in the original nesting; order whole nests.
        order_after(stmts, first, second, "");
      }
    }
  }
  return stmts;
}

} // namespace loomweaver
