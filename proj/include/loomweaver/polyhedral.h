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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loomweaver/affine.h"
#include "loomweaver/frontend.h"

namespace loomweaver {

struct Constraint {
  AffineExpr expr;
  bool is_equality = false; // expr == 0, otherwise expr >= 0

  bool holds(const std::map<std::string, int64_t> &point) const;
  std::string str() const;
  auto operator<=>(const Constraint &) const = default;
};

using Point = std::vector<int64_t>;

/// Conjunction of affine constraints over named dims and existential locals.
class IntegerSet {
public:
  std::vector<std::string> dims;
  std::vector<std::string> locals;
  std::vector<Constraint> constraints;

  static IntegerSet box(const std::vector<IterVar> &iters);

  void add_ge(AffineExpr e) { constraints.push_back({std::move(e), false}); }
  void add_eq(AffineExpr e) { constraints.push_back({std::move(e), true}); }

  /// Existentially quantifies `name` away (Fourier-Motzkin with gcd
  /// tightening; equalities with a unit coefficient are substituted).
  IntegerSet project_out(const std::string &name) const;
  IntegerSet eliminate_locals() const;
  IntegerSet substitute(const std::string &name, const AffineExpr &value) const;

  /// True when some constraint is a false constant.
  bool trivially_empty() const;
  bool contains(const Point &p) const;
  /// Integer points in lexicographic order of `dims`. Throws CompileError if
  /// a dimension is unbounded or the count exceeds `limit`.
  std::vector<Point> enumerate(size_t limit = 4000000) const;

  /// Canonical constraint form: a per-dim box from projection plus the
  /// sorted constraints the box does not already imply.
  IntegerSet normalized() const;

  std::string str() const;
  bool operator==(const IntegerSet &) const = default;
};

/// ceil(num / den) when used as a lower bound, floor(num / den) as an upper
/// bound. den > 0.
struct BoundTerm {
  AffineExpr num;
  int64_t den = 1;
  bool operator==(const BoundTerm &) const = default;
};

/// Bound expression tree: a single term or a max/min over children.
struct BoundExpr {
  enum class Kind { Term, Max, Min };
  Kind kind = Kind::Term;
  BoundTerm term;
  std::vector<BoundExpr> args;

  static BoundExpr of(BoundTerm t);
  static BoundExpr constant(int64_t v);
  static BoundExpr combine(Kind kind, std::vector<BoundExpr> args);

  /// Lower bounds round up, upper bounds round down.
  int64_t evaluate(const std::map<std::string, int64_t> &env, bool is_lower) const;
  std::optional<int64_t> constant_value(bool is_lower) const;
  BoundExpr rename(const std::map<std::string, std::string> &names) const;
  std::string str(bool is_lower) const;
  bool operator==(const BoundExpr &) const = default;
};

struct DimBounds {
  std::vector<BoundTerm> lower; // max of
  std::vector<BoundTerm> upper; // min of
};

/// Bounds on the innermost dim of `keep` after eliminating every other dim
/// and local of `set`. Terms range over the remaining prefix of `keep`.
DimBounds fm_project(const IntegerSet &set, const std::vector<std::string> &keep);

/// 2d+1 schedule: statics[k] precedes loops[k]; statics has one more entry.
struct Schedule {
  std::vector<int64_t> statics;
  std::vector<AffineExpr> loops;

  size_t length() const { return statics.size() + loops.size(); }
  /// Interleaved time tuple for a point of the statement's current dims.
  std::vector<int64_t> tuple(const std::map<std::string, int64_t> &point) const;
  std::string str() const;
  bool operator==(const Schedule &) const = default;
};

/// Records how an original point maps to current dims.
struct DimStep {
  enum class Kind { Split, Skew };
  Kind kind = Kind::Split;
  std::string src_a, src_b; // Split: src_a; Skew: (i, j)
  std::string dst_a, dst_b; // Split: (outer, inner); Skew: (i', j')
  int64_t factor = 1;       // Split: tile size; Skew: t1
  bool operator==(const DimStep &) const = default;
};

/// Maps named values through `steps`.
std::map<std::string, int64_t> apply_steps(const std::vector<DimStep> &steps,
                                           std::map<std::string, int64_t> values);

struct HwAnnotation {
  enum class Kind { Pipeline, Unroll };
  Kind kind = Kind::Pipeline;
  std::string dim;
  int64_t value = 1; // II or factor
  bool operator==(const HwAnnotation &) const = default;
};

struct PolyStmt {
  std::string name;
  int compute_index = 0;
  Compute body;
  IntegerSet domain; // dims in loop order
  Schedule schedule;
  /// Original iterator -> affine expression over current dims.
  std::map<std::string, AffineExpr> orig_subst;
  std::vector<DimStep> steps;
  std::vector<HwAnnotation> annotations;

  int depth() const { return static_cast<int>(domain.dims.size()); }
  int dim_position(const std::string &dim) const;
  /// Current-dim coordinates of an original iteration point.
  std::map<std::string, int64_t> forward(const std::map<std::string, int64_t> &orig) const;
  /// Schedule tuple of an original iteration point.
  std::vector<int64_t> time_of(const std::map<std::string, int64_t> &orig) const;
};

PolyStmt lift(const Compute &c, int order_index);

// Loop transformations. Each returns a transformed copy and throws
// CompileError on bad input.
PolyStmt interchange(const PolyStmt &s, const std::string &a, const std::string &b);
PolyStmt split(const PolyStmt &s, const std::string &dim, int64_t factor, const std::string &outer,
               const std::string &inner);
PolyStmt tile(const PolyStmt &s, const std::string &i, const std::string &j, int64_t ti,
              int64_t tj, const std::string &i0, const std::string &j0, const std::string &i1,
              const std::string &j1);
PolyStmt skew(const PolyStmt &s, const std::string &i, const std::string &j, int64_t t1,
              int64_t t2, const std::string &ni, const std::string &nj);
/// Reorders loops of `s` to `order` (a permutation of its dims).
PolyStmt permute(const PolyStmt &s, const std::vector<std::string> &order);

/// Orders stmts[first] after stmts[second] at `level` (a loop of the second;
/// empty for no shared loop). Statements already placed behind the second
/// at that level move back by one.
void order_after(std::vector<PolyStmt> &stmts, size_t first, size_t second,
                 const std::string &level);

/// Statements in source semantics: identity schedules ordered by `after`
/// directives, whose levels are traced back to original iterators.
std::vector<PolyStmt> reference_statements(const Function &f);

/// Applies a loop-transform directive to the matching statement.
void apply_directive(std::vector<PolyStmt> &stmts, const ScheduleDirective &d);
/// Records a pipeline/unroll directive as an annotation.
void annotate(std::vector<PolyStmt> &stmts, const ScheduleDirective &d);

struct AstNode {
  enum class Kind { Block, For, If, User };
  Kind kind = Kind::Block;

  // For
  std::string iv;
  BoundExpr lower, upper;
  std::vector<HwAnnotation> annotations;     // dims renamed to iv
  std::vector<std::pair<std::string, std::string>> origins; // (stmt, dim)

  // If: conjunction over enclosing ivs
  std::vector<Constraint> conditions;

  // User
  int stmt = -1;
  std::map<std::string, AffineExpr> subst; // domain dim -> expr over ivs

  std::vector<AstNode> children;
};

/// Generates loops scanning the union of the statements in schedule order.
/// Warnings (such as empty loops) are appended to `warnings` when provided.
AstNode build_ast(const std::vector<PolyStmt> &stmts,
                  std::vector<Diagnostic> *warnings = nullptr);

std::string ast_to_string(const AstNode &ast, const std::vector<PolyStmt> &stmts);

/// Executes the AST abstractly; returns (stmt index, current-dim point) per
/// user-node visit, in execution order.
std::vector<std::pair<int, std::map<std::string, int64_t>>>
enumerate_ast(const AstNode &ast, const std::vector<PolyStmt> &stmts);

} // namespace loomweaver
