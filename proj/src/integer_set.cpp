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
#include <numeric>
#include <sstream>

#include "loomweaver/polyhedral.h"

namespace loomweaver {
namespace {

Constraint falsum() { return Constraint{AffineExpr(-1), false}; }

// Divides by the coefficient gcd; inequalities round the constant down,
// equalities with an indivisible constant become false.
Constraint tighten(Constraint c) {
  int64_t g = c.expr.coeff_gcd();
  if (g == 0) {
    bool ok = c.is_equality ? c.expr.constant() == 0 : c.expr.constant() >= 0;
    return ok ? Constraint{AffineExpr(0), false} : falsum();
  }
  if (c.is_equality) {
    if (c.expr.constant() % g != 0)
      return falsum();
    AffineExpr r(c.expr.constant() / g);
    for (const auto &[n, k] : c.expr.coeffs())
      r.set_coeff(n, k / g);
    // Canonical sign: first coefficient positive.
    if (r.coeffs().begin()->second < 0)
      r = -r;
    return {r, true};
  }
  if (g == 1)
    return c;
  AffineExpr r(floor_div(c.expr.constant(), g));
  for (const auto &[n, k] : c.expr.coeffs())
    r.set_coeff(n, k / g);
  return {r, false};
}

bool is_tautology(const Constraint &c) {
  return c.expr.is_constant() &&
         (c.is_equality ? c.expr.constant() == 0 : c.expr.constant() >= 0);
}

void dedupe(std::vector<Constraint> &cs) {
  std::vector<Constraint> out;
  bool empty = false;
  for (auto &c : cs) {
    Constraint t = tighten(c);
    if (is_tautology(t))
      continue;
    if (t.expr.is_constant())
      empty = true;
    out.push_back(std::move(t));
  }
  if (empty) {
    cs = {falsum()};
    return;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  cs = std::move(out);
}

struct Interval {
  std::optional<int64_t> lo, hi;
};

// Smallest value of `e` over the box; nullopt when unbounded below.
std::optional<int64_t> box_min(const AffineExpr &e, const std::map<std::string, Interval> &box) {
  int64_t acc = e.constant();
  for (const auto &[n, k] : e.coeffs()) {
    auto it = box.find(n);
    if (it == box.end())
      return std::nullopt;
    const auto &b = k > 0 ? it->second.lo : it->second.hi;
    if (!b)
      return std::nullopt;
    acc = wrap_add(acc, wrap_mul(k, *b));
  }
  return acc;
}

} // namespace

bool Constraint::holds(const std::map<std::string, int64_t> &point) const {
  int64_t v = expr.evaluate(point);
  return is_equality ? v == 0 : v >= 0;
}

std::string Constraint::str() const { return expr.str() + (is_equality ? " = 0" : " >= 0"); }

IntegerSet IntegerSet::box(const std::vector<IterVar> &iters) {
  IntegerSet s;
  for (const auto &it : iters) {
    s.dims.push_back(it.name);
    s.add_ge(AffineExpr::var(it.name) - AffineExpr(it.lower));
    s.add_ge(AffineExpr(it.upper - 1) - AffineExpr::var(it.name));
  }
  return s;
}

IntegerSet IntegerSet::substitute(const std::string &name, const AffineExpr &value) const {
  IntegerSet r = *this;
  for (auto &c : r.constraints)
    c.expr = c.expr.substitute(name, value);
  return r;
}

IntegerSet IntegerSet::project_out(const std::string &name) const {
  IntegerSet r;
  for (const auto &d : dims)
    if (d != name)
      r.dims.push_back(d);
  for (const auto &l : locals)
    if (l != name)
      r.locals.push_back(l);

  // Unit-coefficient equality: exact substitution.
  for (size_t i = 0; i < constraints.size(); ++i) {
    const auto &c = constraints[i];
    int64_t a = c.expr.coeff(name);
    if (!c.is_equality || (a != 1 && a != -1))
      continue;
    AffineExpr rest = c.expr;
    rest.set_coeff(name, 0);
    AffineExpr value = rest * -a;
    for (size_t j = 0; j < constraints.size(); ++j)
      if (j != i)
        r.constraints.push_back(
            {constraints[j].expr.substitute(name, value), constraints[j].is_equality});
    dedupe(r.constraints);
    return r;
  }

  std::vector<Constraint> lowers, uppers;
  for (const auto &c : constraints) {
    int64_t a = c.expr.coeff(name);
    if (a == 0) {
      r.constraints.push_back(c);
      continue;
    }
    std::vector<Constraint> parts{{c.expr, false}};
    if (c.is_equality)
      parts.push_back({-c.expr, false});
    for (auto &p : parts)
      (p.expr.coeff(name) > 0 ? lowers : uppers).push_back(std::move(p));
  }
  for (const auto &lo : lowers) {
    int64_t a = lo.expr.coeff(name);
    for (const auto &up : uppers) {
      int64_t b = -up.expr.coeff(name);
      int64_t g = std::gcd(a, b);
      AffineExpr combined = lo.expr * (b / g) + up.expr * (a / g);
      combined.set_coeff(name, 0);
      r.constraints.push_back({combined, false});
    }
  }
  dedupe(r.constraints);
  return r;
}

IntegerSet IntegerSet::eliminate_locals() const {
  IntegerSet r = *this;
  while (!r.locals.empty())
    r = r.project_out(r.locals.back());
  return r;
}

bool IntegerSet::trivially_empty() const {
  for (const auto &c : constraints)
    if (c.expr.is_constant() && !is_tautology(c))
      return true;
  return false;
}

bool IntegerSet::contains(const Point &p) const {
  if (p.size() != dims.size())
    return false;
  const IntegerSet &s = locals.empty() ? *this : eliminate_locals();
  std::map<std::string, int64_t> env;
  for (size_t i = 0; i < dims.size(); ++i)
    env[dims[i]] = p[i];
  for (const auto &c : s.constraints)
    if (!c.holds(env))
      return false;
  return true;
}

DimBounds fm_project(const IntegerSet &set, const std::vector<std::string> &keep) {
  IntegerSet s = set.eliminate_locals();
  for (const auto &d : set.dims)
    if (std::find(keep.begin(), keep.end(), d) == keep.end())
      s = s.project_out(d);
  DimBounds out;
  if (keep.empty())
    return out;
  const std::string &x = keep.back();
  auto add = [](std::vector<BoundTerm> &v, AffineExpr num, int64_t den) {
    int64_t g = std::gcd(num.coeff_gcd(), std::gcd(num.constant() < 0 ? -num.constant()
                                                                      : num.constant(),
                                                   den));
    if (g > 1) {
      AffineExpr n(num.constant() / g);
      for (const auto &[name, k] : num.coeffs())
        n.set_coeff(name, k / g);
      num = n;
      den /= g;
    }
    BoundTerm t{num, den};
    if (std::find(v.begin(), v.end(), t) == v.end())
      v.push_back(t);
  };
  for (const auto &c : s.constraints) {
    int64_t a = c.expr.coeff(x);
    if (a == 0) {
      if (c.expr.is_constant() && !is_tautology(c)) {
        // Empty set: report a crossing bound pair.
        add(out.lower, AffineExpr(1), 1);
        add(out.upper, AffineExpr(0), 1);
      }
      continue;
    }
    AffineExpr rest = c.expr;
    rest.set_coeff(x, 0);
    if (a > 0) {
      add(out.lower, -rest, a);
      if (c.is_equality)
        add(out.upper, -rest, a);
    } else {
      add(out.upper, rest, -a);
      if (c.is_equality)
        add(out.lower, rest, -a);
    }
  }
  return out;
}

std::vector<Point> IntegerSet::enumerate(size_t limit) const {
  std::vector<Point> out;
  if (trivially_empty())
    return out;
  IntegerSet full = eliminate_locals();
  std::vector<DimBounds> bounds;
  for (size_t k = 0; k < dims.size(); ++k) {
    std::vector<std::string> keep(dims.begin(), dims.begin() + k + 1);
    bounds.push_back(fm_project(full, keep));
    if (bounds.back().lower.empty() || bounds.back().upper.empty())
      throw CompileError("dimension '" + dims[k] + "' is unbounded");
  }
  std::map<std::string, int64_t> env;
  Point p(dims.size());
  auto rec = [&](auto &self, size_t k) -> void {
    if (k == dims.size()) {
      for (const auto &c : full.constraints)
        if (!c.holds(env))
          return;
      if (out.size() >= limit)
        throw CompileError("integer set has too many points to enumerate");
      out.push_back(p);
      return;
    }
    int64_t lo = INT64_MIN, hi = INT64_MAX;
    for (const auto &t : bounds[k].lower)
      lo = std::max(lo, ceil_div(t.num.evaluate(env), t.den));
    for (const auto &t : bounds[k].upper)
      hi = std::min(hi, floor_div(t.num.evaluate(env), t.den));
    for (int64_t v = lo; v <= hi; ++v) {
      env[dims[k]] = v;
      p[k] = v;
      self(self, k + 1);
    }
    env.erase(dims[k]);
  };
  if (dims.empty()) {
    bool ok = true;
    for (const auto &c : full.constraints)
      ok = ok && c.holds(env);
    if (ok)
      out.push_back({});
    return out;
  }
  rec(rec, 0);
  return out;
}

IntegerSet IntegerSet::normalized() const {
  IntegerSet r;
  r.dims = dims;
  r.locals = locals;
  std::vector<Constraint> cs = constraints;
  dedupe(cs);
  if (!locals.empty()) {
    r.constraints = cs;
    return r;
  }
  if (cs.size() == 1 && cs[0].expr.is_constant()) {
    r.constraints = cs;
    return r;
  }
  IntegerSet tight = *this;
  tight.constraints = cs;
  std::map<std::string, Interval> box;
  for (const auto &d : dims) {
    DimBounds b = fm_project(tight, {d});
    Interval iv;
    for (const auto &t : b.lower) {
      int64_t v = ceil_div(t.num.constant(), t.den);
      iv.lo = iv.lo ? std::max(*iv.lo, v) : v;
    }
    for (const auto &t : b.upper) {
      int64_t v = floor_div(t.num.constant(), t.den);
      iv.hi = iv.hi ? std::min(*iv.hi, v) : v;
    }
    if (iv.lo && iv.hi && *iv.lo > *iv.hi) {
      r.constraints = {falsum()};
      return r;
    }
    box[d] = iv;
  }
  for (const auto &d : dims) {
    const Interval &iv = box[d];
    if (iv.lo)
      r.add_ge(AffineExpr::var(d) - AffineExpr(*iv.lo));
    if (iv.hi)
      r.add_ge(AffineExpr(*iv.hi) - AffineExpr::var(d));
  }
  std::vector<Constraint> rest;
  for (const auto &c : cs) {
    if (c.expr.coeffs().size() == 1)
      continue; // the box is at least as tight
    if (!c.is_equality) {
      auto m = box_min(c.expr, box);
      if (m && *m >= 0)
        continue;
    }
    rest.push_back(c);
  }
  std::sort(rest.begin(), rest.end());
  r.constraints.insert(r.constraints.end(), rest.begin(), rest.end());
  return r;
}

std::string IntegerSet::str() const {
  std::ostringstream os;
  os << "{ (";
  for (size_t i = 0; i < dims.size(); ++i)
    os << (i ? ", " : "") << dims[i];
  os << ")";
  if (!locals.empty()) {
    os << " exists (";
    for (size_t i = 0; i < locals.size(); ++i)
      os << (i ? ", " : "") << locals[i];
    os << ")";
  }
  os << " : ";
  for (size_t i = 0; i < constraints.size(); ++i)
    os << (i ? " and " : "") << constraints[i].str();
  if (constraints.empty())
    os << "true";
  os << " }";
  return os.str();
}

BoundExpr BoundExpr::of(BoundTerm t) {
  BoundExpr b;
  b.term = std::move(t);
  return b;
}

BoundExpr BoundExpr::constant(int64_t v) { return of(BoundTerm{AffineExpr(v), 1}); }

BoundExpr BoundExpr::combine(Kind kind, std::vector<BoundExpr> args) {
  std::vector<BoundExpr> flat;
  for (auto &a : args) {
    if (a.kind == kind)
      for (auto &c : a.args)
        flat.push_back(std::move(c));
    else
      flat.push_back(std::move(a));
  }
  std::vector<BoundExpr> uniq;
  for (auto &a : flat)
    if (std::find(uniq.begin(), uniq.end(), a) == uniq.end())
      uniq.push_back(std::move(a));
  if (uniq.size() == 1)
    return uniq.front();
  BoundExpr b;
  b.kind = kind;
  b.args = std::move(uniq);
  return b;
}

int64_t BoundExpr::evaluate(const std::map<std::string, int64_t> &env, bool is_lower) const {
  switch (kind) {
  case Kind::Term: {
    int64_t v = term.num.evaluate(env);
    return is_lower ? ceil_div(v, term.den) : floor_div(v, term.den);
  }
  case Kind::Max:
  case Kind::Min: {
    int64_t acc = args.front().evaluate(env, is_lower);
    for (size_t i = 1; i < args.size(); ++i) {
      int64_t v = args[i].evaluate(env, is_lower);
      acc = kind == Kind::Max ? std::max(acc, v) : std::min(acc, v);
    }
    return acc;
  }
  }
  return 0;
}

std::optional<int64_t> BoundExpr::constant_value(bool is_lower) const {
  if (kind == Kind::Term)
    return term.num.is_constant() ? std::optional(evaluate({}, is_lower)) : std::nullopt;
  for (const auto &a : args)
    if (!a.constant_value(is_lower))
      return std::nullopt;
  return evaluate({}, is_lower);
}

BoundExpr BoundExpr::rename(const std::map<std::string, std::string> &names) const {
  BoundExpr b = *this;
  b.term.num = term.num.rename(names);
  for (auto &a : b.args)
    a = a.rename(names);
  return b;
}

std::string BoundExpr::str(bool is_lower) const {
  if (kind == Kind::Term) {
    if (term.den == 1)
      return term.num.str();
    return std::string(is_lower ? "ceild(" : "floord(") + term.num.str() + ", " +
           std::to_string(term.den) + ")";
  }
  std::string out = kind == Kind::Max ? "max(" : "min(";
  for (size_t i = 0; i < args.size(); ++i)
    out += (i ? ", " : "") + args[i].str(is_lower);
  return out + ")";
}

std::vector<int64_t> Schedule::tuple(const std::map<std::string, int64_t> &point) const {
  std::vector<int64_t> t;
  t.reserve(length());
  for (size_t k = 0; k < loops.size(); ++k) {
    t.push_back(statics[k]);
    t.push_back(loops[k].evaluate(point));
  }
  t.push_back(statics.back());
  return t;
}

std::string Schedule::str() const {
  std::string out = "[";
  for (size_t k = 0; k < loops.size(); ++k)
    out += std::to_string(statics[k]) + ", " + loops[k].str() + ", ";
  return out + std::to_string(statics.back()) + "]";
}

} // namespace loomweaver
