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

#include <gtest/gtest.h>

#include <set>

#include "corpus.h"
#include "loomweaver/driver.h"
#include "loomweaver/polyhedral.h"

namespace loomweaver {
namespace {

Compute box_compute(std::vector<IterVar> iters) {
  Compute c;
  c.name = "S";
  c.iters = std::move(iters);
  c.dest.array = "A";
  for (const auto &it : c.iters) c.dest.indices.push_back(AffineExpr::var(it.name));
  c.rhs = Expr::float_constant(1.0);
  return c;
}

std::set<Point> points(const IntegerSet &s) {
  auto v = s.enumerate();
  return {v.begin(), v.end()};
}

// Original coordinates of every domain point, through the inverse map.
std::multiset<Point> preimage(const PolyStmt &s) {
  std::multiset<Point> out;
  for (const auto &p : s.domain.enumerate()) {
    std::map<std::string, int64_t> env;
    for (size_t k = 0; k < p.size(); ++k) env[s.domain.dims[k]] = p[k];
    Point q;
    for (const auto &it : s.body.iters) q.push_back(s.orig_subst.at(it.name).evaluate(env));
    out.insert(q);
  }
  return out;
}

std::multiset<Point> box(const std::vector<IterVar> &iters) {
  std::multiset<Point> out{{}};
  for (const auto &it : iters) {
    std::multiset<Point> next;
    for (auto p : out)
      for (int64_t v = it.lower; v < it.upper; ++v) {
        p.push_back(v);
        next.insert(p);
        p.pop_back();
      }
    out = std::move(next);
  }
  return out;
}

TEST(Affine, FloorCeilMod) {
  EXPECT_EQ(floor_div(-7, 2), -4);
  EXPECT_EQ(ceil_div(-7, 2), -3);
  EXPECT_EQ(floor_mod(-7, 3), 2);
  EXPECT_EQ(ceil_div(7, 7), 1);
  EXPECT_EQ(wrap_add(INT64_MAX, 1), INT64_MIN);
}

TEST(Affine, Substitution) {
  AffineExpr e = AffineExpr::var("i", 2) + AffineExpr::var("j") + AffineExpr(3);
  AffineExpr s = e.substitute("i", AffineExpr::var("a", 4) + AffineExpr::var("b"));
  EXPECT_EQ(s.coeff("a"), 8);
  EXPECT_EQ(s.coeff("b"), 2);
  EXPECT_EQ(s.coeff("i"), 0);
  EXPECT_EQ(s.evaluate({{"a", 1}, {"b", 2}, {"j", 5}}), 8 + 4 + 5 + 3);
  EXPECT_EQ((e - e).is_constant(), true);
}

TEST(Lift, IdentityDomainAndSchedule) {
  PolyStmt s = lift(box_compute({{"i", 0, 32}, {"j", 0, 32}}), 0);
  EXPECT_EQ(s.domain.dims, (std::vector<std::string>{"i", "j"}));
  EXPECT_EQ(s.schedule.tuple({{"i", 5}, {"j", 9}}), (std::vector<int64_t>{0, 5, 0, 9, 0}));
  EXPECT_EQ(s.domain.enumerate().size(), 1024u);
}

TEST(Interchange, SwapsSlotsAndIsAnInvolution) {
  PolyStmt s = lift(box_compute({{"i", 0, 4}, {"j", 0, 6}}), 0);
  PolyStmt t = interchange(s, "i", "j");
  EXPECT_EQ(t.schedule.tuple({{"i", 1}, {"j", 2}}), (std::vector<int64_t>{0, 2, 0, 1, 0}));
  EXPECT_EQ(t.domain.dims, (std::vector<std::string>{"j", "i"}));
  PolyStmt u = interchange(t, "i", "j");
  EXPECT_EQ(u.domain.dims, s.domain.dims);
  EXPECT_EQ(u.schedule, s.schedule);
  EXPECT_THROW(interchange(s, "i", "q"), CompileError);
}

TEST(Split, NonDivisibleKeepsGuard) {
  PolyStmt s = split(lift(box_compute({{"i", 0, 10}}), 0), "i", 4, "i0", "i1");
  std::set<Point> want;
  for (int64_t i = 0; i < 10; ++i) want.insert({i / 4, i % 4});
  EXPECT_EQ(points(s.domain), want);
  EXPECT_EQ(preimage(s), box(s.body.iters));

  DimBounds b = fm_project(s.domain, {"i0", "i1"});
  // Upper bound of i1 is min(3, 9 - 4*i0): check it pointwise.
  for (int64_t i0 = 0; i0 <= 2; ++i0) {
    int64_t hi = INT64_MAX;
    for (const auto &t : b.upper)
      hi = std::min(hi, floor_div(t.num.evaluate({{"i0", i0}}), t.den));
    EXPECT_EQ(hi, std::min<int64_t>(3, 9 - 4 * i0)) << i0;
  }
}

TEST(Split, ByExtentLeavesSingleOuter) {
  PolyStmt s = split(lift(box_compute({{"i", 0, 8}}), 0), "i", 8, "i0", "i1");
  for (const auto &p : s.domain.enumerate()) EXPECT_EQ(p[0], 0);
  EXPECT_EQ(s.domain.enumerate().size(), 8u);
}

TEST(Split, RejectsBadInput) {
  PolyStmt s = lift(box_compute({{"i", 0, 8}, {"j", 0, 8}}), 0);
  EXPECT_THROW(split(s, "i", 1, "a", "b"), CompileError);
  EXPECT_THROW(split(s, "i", 2, "j", "b"), CompileError);
}

TEST(Tile, EqualsSplitSplitInterchange) {
  PolyStmt s = lift(box_compute({{"i", 0, 10}, {"j", 0, 7}, {"k", 0, 3}}), 0);
  PolyStmt t = tile(s, "i", "j", 4, 3, "i0", "j0", "i1", "j1");
  PolyStmt c = split(s, "i", 4, "i0", "i1");
  c = split(c, "j", 3, "j0", "j1");
  c = interchange(c, "i1", "j0");
  EXPECT_EQ(t.domain.dims, (std::vector<std::string>{"i0", "j0", "i1", "j1", "k"}));
  EXPECT_EQ(t.domain.dims, c.domain.dims);
  EXPECT_EQ(points(t.domain), points(c.domain));
  EXPECT_EQ(preimage(t), box(s.body.iters));
}

TEST(Tile, EightByEightIntoFourTiles) {
  PolyStmt t = tile(lift(box_compute({{"i", 0, 8}, {"j", 0, 8}}), 0), "i", "j", 4, 4, "i0",
                    "j0", "i1", "j1");
  std::map<std::pair<int64_t, int64_t>, int> per_tile;
  for (const auto &p : t.domain.enumerate()) ++per_tile[{p[0], p[1]}];
  EXPECT_EQ(per_tile.size(), 4u);
  for (const auto &[k, n] : per_tile) EXPECT_EQ(n, 16);
}

TEST(Tile, UnitFactorsKeepPoints) {
  PolyStmt s = lift(box_compute({{"i", 0, 5}, {"j", 0, 3}}), 0);
  PolyStmt t = tile(s, "i", "j", 1, 1, "i0", "j0", "i1", "j1");
  EXPECT_EQ(preimage(t), box(s.body.iters));
}

TEST(Skew, Wavefront) {
  PolyStmt s = skew(lift(box_compute({{"i", 0, 3}, {"j", 0, 3}}), 0), "i", "j", 1, 1, "a", "b");
  std::set<Point> want;
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t j = 0; j < 3; ++j) want.insert({i, i + j});
  EXPECT_EQ(points(s.domain), want);
  EXPECT_EQ(s.domain.enumerate().size(), 9u);

  DimBounds b = fm_project(s.domain, {"a", "b"});
  for (int64_t a = 0; a < 3; ++a) {
    int64_t lo = INT64_MIN, hi = INT64_MAX;
    for (const auto &t : b.lower) lo = std::max(lo, ceil_div(t.num.evaluate({{"a", a}}), t.den));
    for (const auto &t : b.upper) hi = std::min(hi, floor_div(t.num.evaluate({{"a", a}}), t.den));
    EXPECT_EQ(lo, a);
    EXPECT_EQ(hi, a + 2);
  }
}

TEST(Skew, MapsDistanceVector) {
  // (1,-1) becomes (1,0) under j' = i + j.
  PolyStmt s = skew(lift(box_compute({{"i", 0, 6}, {"j", 0, 6}}), 0), "i", "j", 1, 1, "a", "b");
  auto p = s.forward({{"i", 2}, {"j", 3}});
  auto q = s.forward({{"i", 3}, {"j", 2}});
  EXPECT_EQ(q.at("a") - p.at("a"), 1);
  EXPECT_EQ(q.at("b") - p.at("b"), 0);
  EXPECT_THROW(skew(lift(box_compute({{"i", 0, 6}, {"j", 0, 6}}), 0), "i", "j", 1, 2, "a", "b"),
               CompileError);
}

TEST(FmProject, SimpleBox) {
  IntegerSet s = IntegerSet::box({{"i", 0, 32}});
  DimBounds b = fm_project(s, {"i"});
  ASSERT_EQ(b.lower.size(), 1u);
  ASSERT_EQ(b.upper.size(), 1u);
  EXPECT_EQ(b.lower[0].num.constant(), 0);
  EXPECT_EQ(b.upper[0].num.constant() / b.upper[0].den, 31);
}

TEST(FmProject, MatchesEnumerationOnTriangle) {
  IntegerSet s = IntegerSet::box({{"i", 0, 10}, {"j", 0, 10}});
  s.add_ge(AffineExpr::var("i", 2) - AffineExpr::var("j", 3) + AffineExpr(4));
  std::map<int64_t, std::pair<int64_t, int64_t>> range;
  for (const auto &p : s.enumerate()) {
    auto [it, fresh] = range.try_emplace(p[0], p[1], p[1]);
    if (!fresh) {
      it->second.first = std::min(it->second.first, p[1]);
      it->second.second = std::max(it->second.second, p[1]);
    }
  }
  DimBounds b = fm_project(s, {"i", "j"});
  for (const auto &[i, r] : range) {
    int64_t lo = INT64_MIN, hi = INT64_MAX;
    for (const auto &t : b.lower) lo = std::max(lo, ceil_div(t.num.evaluate({{"i", i}}), t.den));
    for (const auto &t : b.upper) hi = std::min(hi, floor_div(t.num.evaluate({{"i", i}}), t.den));
    EXPECT_EQ(lo, r.first) << i;
    EXPECT_EQ(hi, r.second) << i;
  }
}

TEST(OrderAfter, SharedLoopStatics) {
  Compute a = box_compute({{"i", 0, 4}});
  Compute b = box_compute({{"i", 0, 4}});
  b.name = "T";
  std::vector<PolyStmt> stmts = {lift(a, 0), lift(b, 1)};
  order_after(stmts, 1, 0, "i");
  EXPECT_EQ(stmts[0].schedule.statics, (std::vector<int64_t>{0, 0}));
  EXPECT_EQ(stmts[1].schedule.statics, (std::vector<int64_t>{0, 1}));

  std::vector<PolyStmt> seq = {lift(a, 0), lift(b, 1)};
  order_after(seq, 0, 1, "");
  EXPECT_EQ(seq[1].schedule.statics[0], 0);
  EXPECT_EQ(seq[0].schedule.statics[0], 1);
}

TEST(BuildAst, GemmNesting) {
  Function f = testing::load_kernel("gemm");
  auto stmts = schedule_statements(f);
  AstNode ast = build_ast(stmts);
  int depth = 0;
  const AstNode *n = &ast;
  while (!n->children.empty()) {
    n = &n->children.front();
    if (n->kind == AstNode::Kind::For) ++depth;
  }
  EXPECT_EQ(depth, 3);
  EXPECT_EQ(n->kind, AstNode::Kind::User);
}

TEST(BuildAst, CoversUnionInScheduleOrder) {
  for (const char *name : {"jacobi1d", "seidel", "bicg", "gesummv", "3mm", "gemm_tiled"}) {
    Function f = testing::load_kernel(name);
    auto stmts = schedule_statements(f);
    auto visits = enumerate_ast(build_ast(stmts), stmts);
    size_t total = 0;
    for (const auto &s : stmts) total += s.domain.enumerate().size();
    EXPECT_EQ(visits.size(), total) << name;

    size_t width = 0;
    for (const auto &s : stmts) width = std::max(width, s.schedule.length());
    std::set<std::pair<int, Point>> seen;
    std::vector<int64_t> prev;
    for (const auto &[idx, pt] : visits) {
      auto t = stmts[idx].schedule.tuple(pt);
      t.resize(width, 0);
      if (!prev.empty()) EXPECT_LT(prev, t) << name;
      prev = t;
      Point p;
      for (const auto &d : stmts[idx].domain.dims) p.push_back(pt.at(d));
      EXPECT_TRUE(stmts[idx].domain.contains(p));
      EXPECT_TRUE(seen.insert({idx, p}).second);
    }
  }
}

TEST(BuildAst, PipelineAnnotationOnTiledLoop) {
  Function f = parse_program(R"(func f { iter t = 0..32; iter i = 0..32;
    array A: f32[32][32] inout;
    compute S3 (t, i) { A[t][i] = A[t][i] + 1.0; }
    schedule { S3.split(i, 8, i0, i1); S3.pipeline(i1, 1); } })");
  auto stmts = schedule_statements(f);
  AstNode ast = build_ast(stmts);
  std::vector<std::string> ivs;
  const AstNode *n = &ast;
  const AstNode *last_for = nullptr;
  while (!n->children.empty()) {
    n = &n->children.front();
    if (n->kind == AstNode::Kind::For) {
      ivs.push_back(n->iv);
      last_for = n;
    }
  }
  EXPECT_EQ(ivs, (std::vector<std::string>{"t", "i0", "i1"}));
  ASSERT_NE(last_for, nullptr);
  ASSERT_EQ(last_for->annotations.size(), 1u);
  EXPECT_EQ(last_for->annotations[0].kind, HwAnnotation::Kind::Pipeline);
  EXPECT_NE(ast_to_string(ast, stmts).find("@pipeline(II=1)"), std::string::npos);
}

} // namespace
} // namespace loomweaver
