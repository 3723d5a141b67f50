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
#include <sstream>

#include "loomweaver/polyhedral.h"

namespace loomweaver {
namespace {

struct Range {
  int64_t lo = 0, hi = 0;
};

using Box = std::map<std::string, Range>;

Range range_of(const AffineExpr &e, const Box &box) {
  Range r{e.constant(), e.constant()};
  for (const auto &[n, k] : e.coeffs()) {
    auto it = box.find(n);
    if (it == box.end())
      throw CompileError("bound refers to unknown loop '" + n + "'");
    int64_t a = wrap_mul(k, it->second.lo), b = wrap_mul(k, it->second.hi);
    r.lo = wrap_add(r.lo, std::min(a, b));
    r.hi = wrap_add(r.hi, std::max(a, b));
  }
  return r;
}

Range range_of(const BoundExpr &b, const Box &box, bool is_lower) {
  if (b.kind == BoundExpr::Kind::Term) {
    Range r = range_of(b.term.num, box);
    if (is_lower)
      return {ceil_div(r.lo, b.term.den), ceil_div(r.hi, b.term.den)};
    return {floor_div(r.lo, b.term.den), floor_div(r.hi, b.term.den)};
  }
  Range acc = range_of(b.args.front(), box, is_lower);
  for (size_t i = 1; i < b.args.size(); ++i) {
    Range r = range_of(b.args[i], box, is_lower);
    if (b.kind == BoundExpr::Kind::Max)
      acc = {std::max(acc.lo, r.lo), std::max(acc.hi, r.hi)};
    else
      acc = {std::min(acc.lo, r.lo), std::min(acc.hi, r.hi)};
  }
  return acc;
}

// True when a/da >= b/db everywhere in the box.
bool dominates(const BoundTerm &a, const BoundTerm &b, const Box &box) {
  return range_of(a.num * b.den - b.num * a.den, box).lo >= 0;
}

std::vector<BoundTerm> prune(std::vector<BoundTerm> terms, const Box &box, bool is_lower) {
  std::vector<bool> gone(terms.size(), false);
  for (size_t i = 0; i < terms.size(); ++i)
    for (size_t j = 0; j < terms.size(); ++j) {
      if (i == j || gone[j] || gone[i])
        continue;
      bool covered = is_lower ? dominates(terms[j], terms[i], box)
                              : dominates(terms[i], terms[j], box);
      if (covered)
        gone[i] = true;
    }
  std::vector<BoundTerm> out;
  for (size_t i = 0; i < terms.size(); ++i)
    if (!gone[i])
      out.push_back(terms[i]);
  return out;
}

BoundExpr fold(BoundExpr b, const Box &box, bool is_lower) {
  Range r = range_of(b, box, is_lower);
  if (r.lo == r.hi)
    return BoundExpr::constant(r.lo);
  return b;
}

class Builder {
public:
  Builder(const std::vector<PolyStmt> &stmts, std::vector<Diagnostic> *warnings)
      : stmts_(stmts), warnings_(warnings) {}

  AstNode run() {
    AstNode root;
    root.kind = AstNode::Kind::Block;
    std::vector<int> all;
    for (size_t i = 0; i < stmts_.size(); ++i) {
      if (!stmts_[i].domain.locals.empty())
        throw CompileError("domain of '" + stmts_[i].name +
                           "' has existential dimensions; code generation needs plain loops");
      if (stmts_[i].schedule.loops.size() + 1 != stmts_[i].schedule.statics.size())
        throw CompileError("malformed schedule for '" + stmts_[i].name + "'");
      all.push_back(static_cast<int>(i));
    }
    if (all.empty())
      return root;
    State st;
    st.renames.resize(stmts_.size());
    st.guards.resize(stmts_.size());
    root.children = build(all, 0, st);
    return root;
  }

private:
  struct State {
    Box box;
    std::vector<std::string> ivs;
    std::vector<std::map<std::string, std::string>> renames;
    std::vector<std::vector<Constraint>> guards;
  };

  size_t length(int s) const { return stmts_[s].schedule.length(); }

  int64_t static_at(int s, size_t pos) const {
    size_t k = pos / 2;
    const auto &st = stmts_[s].schedule.statics;
    return k < st.size() && pos < length(s) ? st[k] : 0;
  }

  std::vector<AstNode> build(const std::vector<int> &group, size_t pos, State &st) {
    bool all_done = true, any_done = false;
    for (int s : group) {
      bool done = pos >= length(s);
      all_done = all_done && done;
      any_done = any_done || done;
    }
    if (all_done) {
      if (group.size() > 1)
        throw CompileError("non-comparable schedules: '" + stmts_[group[0]].name + "' and '" +
                           stmts_[group[1]].name + "' have identical time tuples");
      return {leaf(group[0], st)};
    }
    if (pos % 2 == 0) {
      std::map<int64_t, std::vector<int>> parts;
      for (int s : group)
        parts[static_at(s, pos)].push_back(s);
      std::vector<AstNode> out;
      for (auto &[v, sub] : parts) {
        auto nodes = build(sub, pos + 1, st);
        for (auto &n : nodes)
          out.push_back(std::move(n));
      }
      return out;
    }
    if (any_done)
      throw CompileError("non-comparable schedules: statements of different depth share every "
                         "static coordinate");
    return {loop(group, pos / 2, pos, st)};
  }

  AstNode leaf(int s, const State &st) {
    AstNode user;
    user.kind = AstNode::Kind::User;
    user.stmt = s;
    for (const auto &d : stmts_[s].domain.dims)
      user.subst[d] = AffineExpr::var(st.renames[s].at(d));
    if (st.guards[s].empty())
      return user;
    AstNode guard;
    guard.kind = AstNode::Kind::If;
    guard.conditions = st.guards[s];
    guard.children.push_back(std::move(user));
    return guard;
  }

  std::string pick_iv(const std::vector<int> &group, size_t k, const State &st) const {
    std::string name = stmts_[group[0]].domain.dims[k];
    std::string cand = name;
    for (int n = 1; std::find(st.ivs.begin(), st.ivs.end(), cand) != st.ivs.end(); ++n)
      cand = name + "_" + std::to_string(n);
    return cand;
  }

  AstNode loop(const std::vector<int> &group, size_t k, size_t pos, State &st) {
    AstNode node;
    node.kind = AstNode::Kind::For;
    node.iv = pick_iv(group, k, st);

    std::vector<BoundExpr> lowers, uppers;
    std::vector<std::vector<BoundTerm>> low_terms, up_terms;
    for (int s : group) {
      const PolyStmt &ps = stmts_[s];
      std::vector<std::string> keep(ps.domain.dims.begin(), ps.domain.dims.begin() + k + 1);
      DimBounds b = fm_project(ps.domain, keep);
      if (b.lower.empty() || b.upper.empty())
        throw CompileError("loop '" + keep.back() + "' of '" + ps.name + "' is unbounded");
      for (auto *terms : {&b.lower, &b.upper})
        for (auto &t : *terms)
          t.num = t.num.rename(st.renames[s]);
      b.lower = prune(b.lower, st.box, true);
      b.upper = prune(b.upper, st.box, false);
      std::vector<BoundExpr> lo, up;
      for (const auto &t : b.lower)
        lo.push_back(BoundExpr::of(t));
      for (const auto &t : b.upper)
        up.push_back(BoundExpr::of(t));
      lowers.push_back(fold(BoundExpr::combine(BoundExpr::Kind::Max, lo), st.box, true));
      uppers.push_back(fold(BoundExpr::combine(BoundExpr::Kind::Min, up), st.box, false));
      low_terms.push_back(b.lower);
      up_terms.push_back(b.upper);
    }
    node.lower = BoundExpr::combine(BoundExpr::Kind::Min, lowers);
    node.upper = BoundExpr::combine(BoundExpr::Kind::Max, uppers);

    Range lo = range_of(node.lower, st.box, true);
    Range hi = range_of(node.upper, st.box, false);
    if (lo.lo > hi.hi) {
      if (warnings_)
        warnings_->push_back(warning("empty loop '" + node.iv + "' removed"));
      AstNode empty;
      empty.kind = AstNode::Kind::Block;
      return empty;
    }

    std::vector<std::vector<Constraint>> saved_guards;
    for (size_t g = 0; g < group.size(); ++g) {
      int s = group[g];
      saved_guards.push_back(st.guards[s]);
      AffineExpr iv = AffineExpr::var(node.iv);
      if (!(lowers[g] == node.lower))
        for (const auto &t : low_terms[g])
          st.guards[s].push_back({iv * t.den - t.num, false});
      if (!(uppers[g] == node.upper))
        for (const auto &t : up_terms[g])
          st.guards[s].push_back({t.num - iv * t.den, false});
      const PolyStmt &ps = stmts_[s];
      const std::string &dim = ps.domain.dims[k];
      node.origins.push_back({ps.name, dim});
      for (const auto &a : ps.annotations) {
        if (a.dim != dim)
          continue;
        HwAnnotation renamed{a.kind, node.iv, a.value};
        bool merged = false;
        for (const auto &e : node.annotations)
          if (e.kind == a.kind) {
            if (e.value != a.value)
              throw CompileError("conflicting directives on shared loop '" + node.iv + "'");
            merged = true;
          }
        if (!merged)
          node.annotations.push_back(renamed);
      }
    }

    std::vector<std::map<std::string, std::string>> saved_renames;
    for (int s : group) {
      saved_renames.push_back(st.renames[s]);
      st.renames[s][stmts_[s].domain.dims[k]] = node.iv;
    }
    st.box[node.iv] = {lo.lo, hi.hi};
    st.ivs.push_back(node.iv);
    node.children = build(group, pos + 1, st);
    st.ivs.pop_back();
    st.box.erase(node.iv);
    for (size_t g = 0; g < group.size(); ++g) {
      st.renames[group[g]] = saved_renames[g];
      st.guards[group[g]] = saved_guards[g];
    }
    return node;
  }

  const std::vector<PolyStmt> &stmts_;
  std::vector<Diagnostic> *warnings_;
};

void print(std::ostringstream &os, const AstNode &n, const std::vector<PolyStmt> &stmts,
           int indent) {
  std::string pad(indent * 2, ' ');
  switch (n.kind) {
  case AstNode::Kind::Block:
    for (const auto &c : n.children)
      print(os, c, stmts, indent);
    return;
  case AstNode::Kind::For:
    for (const auto &a : n.annotations) {
      if (a.kind == HwAnnotation::Kind::Pipeline)
        os << pad << "@pipeline(II=" << a.value << ")\n";
      else
        os << pad << "@unroll(factor=" << a.value << ")\n";
    }
    os << pad << "for " << n.iv << " in [" << n.lower.str(true) << ", " << n.upper.str(false)
       << "] {\n";
    for (const auto &c : n.children)
      print(os, c, stmts, indent + 1);
    os << pad << "}\n";
    return;
  case AstNode::Kind::If:
    os << pad << "if (";
    for (size_t i = 0; i < n.conditions.size(); ++i)
      os << (i ? " and " : "") << n.conditions[i].str();
    os << ") {\n";
    for (const auto &c : n.children)
      print(os, c, stmts, indent + 1);
    os << pad << "}\n";
    return;
  case AstNode::Kind::User: {
    const PolyStmt &s = stmts[n.stmt];
    os << pad << s.name << "(";
    bool first = true;
    for (const auto &it : s.body.iters) {
      os << (first ? "" : ", ") << s.orig_subst.at(it.name).substitute(n.subst).str();
      first = false;
    }
    os << ")\n";
    return;
  }
  }
}

void walk(const AstNode &n, std::map<std::string, int64_t> &env,
          std::vector<std::pair<int, std::map<std::string, int64_t>>> &out) {
  switch (n.kind) {
  case AstNode::Kind::Block:
    for (const auto &c : n.children)
      walk(c, env, out);
    return;
  case AstNode::Kind::For: {
    int64_t lo = n.lower.evaluate(env, true), hi = n.upper.evaluate(env, false);
    for (int64_t v = lo; v <= hi; ++v) {
      env[n.iv] = v;
      for (const auto &c : n.children)
        walk(c, env, out);
    }
    env.erase(n.iv);
    return;
  }
  case AstNode::Kind::If:
    for (const auto &c : n.conditions)
      if (!c.holds(env))
        return;
    for (const auto &c : n.children)
      walk(c, env, out);
    return;
  case AstNode::Kind::User: {
    std::map<std::string, int64_t> point;
    for (const auto &[d, e] : n.subst)
      point[d] = e.evaluate(env);
    out.push_back({n.stmt, std::move(point)});
    return;
  }
  }
}

} // namespace

AstNode build_ast(const std::vector<PolyStmt> &stmts, std::vector<Diagnostic> *warnings) {
  return Builder(stmts, warnings).run();
}

std::string ast_to_string(const AstNode &ast, const std::vector<PolyStmt> &stmts) {
  std::ostringstream os;
  print(os, ast, stmts, 0);
  return os.str();
}

std::vector<std::pair<int, std::map<std::string, int64_t>>>
enumerate_ast(const AstNode &ast, const std::vector<PolyStmt> &stmts) {
  (void)stmts;
  std::vector<std::pair<int, std::map<std::string, int64_t>>> out;
  std::map<std::string, int64_t> env;
  walk(ast, env, out);
  return out;
}

} // namespace loomweaver
