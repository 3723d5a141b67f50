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

// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "corpus.h"
#include "loomweaver/depgraph.h"
#include "loomweaver/driver.h"
#include "loomweaver/dse.h"
#include "loomweaver/emit.h"
#include "loomweaver/interp.h"
#include "loomweaver/perfmodel.h"
#include "loomweaver/polyhedral.h"

namespace fs = std::filesystem;
using namespace loomweaver;
using namespace loomweaver::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string &what) {
  if (!cond) throw Failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// C1: split of a 32x32 box

Outcome split_domain() {
  Function f = parse_program(R"(func f {
    iter t = 0..32; iter i = 0..32;
    array A: f32[32][32] inout;
    compute S (t, i) { A[t][i] = A[t][i] + 1.0; }
  })");
  PolyStmt s = split(lift(f.computes[0], 0), "i", 8, "i0", "i1");
  require(s.domain.dims == std::vector<std::string>({"t", "i0", "i1"}), "dims after split");

  IntegerSet expected;
  expected.dims = {"t", "i0", "i1"};
  auto bound = [&](const std::string &d, int64_t hi) {
    expected.add_ge(AffineExpr::var(d));
    expected.add_ge(AffineExpr(hi) - AffineExpr::var(d));
  };
  bound("t", 31);
  bound("i0", 3);
  bound("i1", 7);
  require(s.domain.normalized() == expected.normalized(),
          "normalized domain " + s.domain.normalized().str());

  std::set<Point> want;
  for (int64_t t = 0; t < 32; ++t)
    for (int64_t i = 0; i < 32; ++i)
      want.insert({t, i / 8, i % 8});
  auto pts = s.domain.enumerate();
  require(pts.size() == 1024, "enumerated " + std::to_string(pts.size()) + " points");
  require(std::set<Point>(pts.begin(), pts.end()) == want, "enumerated point set");
  for (const auto &p : pts) {
    std::map<std::string, int64_t> env{{"t", p[0]}, {"i0", p[1]}, {"i1", p[2]}};
    int64_t i = s.orig_subst.at("i").evaluate(env);
    require(i == 8 * p[1] + p[2], "inverse map of i");
  }
  return {true, "1024 points, normalized form matches"};
}

// ---------------------------------------------------------------------------
// C2: node attributes for the stencil and matmul

Outcome node_attributes() {
  Function st = load_kernel("stencil");
  NodeAttr a = analyze_node(st.computes[0]);
  require(!a.self_deps.empty(), "stencil has no self dependence");
  for (const auto &d : a.self_deps) {
    require(d.distance.known && d.distance.entries == std::vector<int64_t>({1, 1}),
            "stencil distance");
    require(d.direction.str() == "<<", "stencil direction " + d.direction.str());
  }

  Function mm = load_kernel("gemm");
  NodeAttr m = analyze_node(mm.computes[0]);
  require(m.reduction_dims == std::set<int>({2}), "matmul reduction dims");
  bool found = false;
  for (const auto &d : m.self_deps)
    if (d.reduction && d.distance.entries == std::vector<int64_t>({0, 0, 1})) found = true;
  require(found, "matmul distance (0,0,1)");

  // Brute force over clamped instance sets.
  for (int64_t n = 4; n <= 8; ++n) {
    // Stencil: every write/read pair on a cell differs by the distance.
    auto pairs = brute_force_dependences(st.computes[0], n);
    require(!pairs.empty(), "stencil oracle empty at " + std::to_string(n));
    for (const auto &[src, dst] : pairs)
      require(dst[0] - src[0] == 1 && dst[1] - src[1] == 1, "stencil oracle pair");
    // Local enumeration of the same relation.
    size_t local = 0;
    for (int64_t i = 1; i < 1 + n && i < 8; ++i)
      for (int64_t j = 1; j < 1 + n && j < 8; ++j)
        if (i + 1 < 1 + n && i + 1 < 8 && j + 1 < 1 + n && j + 1 < 8) ++local;
    require(local == pairs.size(), "stencil pair count");

    auto mp = brute_force_dependences(mm.computes[0], n);
    int64_t min_k = INT64_MAX;
    for (const auto &[src, dst] : mp) {
      require(src[0] == dst[0] && src[1] == dst[1] && dst[2] > src[2], "matmul oracle pair");
      min_k = std::min(min_k, dst[2] - src[2]);
    }
    require(min_k == 1, "matmul minimal distance");
  }
  return {true, "stencil (1,1) '<<', matmul (0,0,1) reduction k; oracle n=4..8"};
}

// ---------------------------------------------------------------------------
// C3: BICG stage-1 trace and final loop order

std::string original_dim(std::string dim, const std::vector<DimStep> &steps) {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->kind == DimStep::Kind::Split && (dim == it->dst_a || dim == it->dst_b))
      dim = it->src_a;
    else if (it->kind == DimStep::Kind::Skew) {
      if (dim == it->dst_a) dim = it->src_a;
      else if (dim == it->dst_b) dim = it->src_b;
    }
  }
  return dim;
}

bool contains_stmt(const Node &n, const std::string &name) {
  if (const auto *s = std::get_if<StmtNode>(&n.value)) return s->name == name;
  const std::vector<Node> &body = std::holds_alternative<LoopNode>(n.value)
                                      ? std::get<LoopNode>(n.value).body
                                      : std::get<IfNode>(n.value).body;
  return std::any_of(body.begin(), body.end(),
                     [&](const Node &c) { return contains_stmt(c, name); });
}

Outcome bicg_trace() {
  Function f = load_kernel("bicg");
  DseResult r = auto_dse(f, DseConfig{});
  std::vector<std::string> trace;
  for (const auto &s : r.trace) trace.push_back(s.str());
  std::vector<std::string> want = {"split(S1,S2)", "interchange(S2,i,j)", "fuse(S1,S2)"};
  std::string joined;
  for (const auto &s : trace) joined += (joined.empty() ? "" : " ") + s;
  require(trace == want, "trace " + joined);

  const Node *root = nullptr;
  for (const auto &n : r.ir.roots)
    if (contains_stmt(n, "S2")) root = &n;
  require(root && contains_stmt(*root, "S1"), "S1 and S2 not fused");
  const auto *outer = std::get_if<LoopNode>(&root->value);
  require(outer != nullptr, "fused nest has no outer loop");

  bool checked = false;
  for_each_stmt(r.ir, [&](const StmtNode &s, const std::vector<const LoopNode *> &loops) {
    if (s.name != "S2") return;
    require(!loops.empty() && loops.front() == outer, "S2 outer loop");
    std::string dim;
    for (const auto &[d, iv] : s.dim_to_iv)
      if (iv == outer->iv) dim = d;
    require(original_dim(dim, s.steps) == "j", "S2 outermost dim is " + dim);
    checked = true;
  });
  require(checked, "S2 not found in loop IR");
  return {true, joined + "; S2 j outermost in fused nest"};
}

// ---------------------------------------------------------------------------
// C4: semantic equivalence over the corpus

Outcome equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  size_t runs = 0, exact = 0, variants = 0;
  std::set<std::string> kinds;
  for (const auto &name : corpus_names()) {
    Function base = load_kernel(name);
    for (const auto &v : directive_matrix(base)) {
      kinds.insert(v.label);
      ++variants;
      Compilation c = compile(v.f);
      bool any_float = std::any_of(v.f.placeholders.begin(), v.f.placeholders.end(),
                                   [](const Placeholder &p) { return p.dtype.is_float(); });
      for (uint64_t seed : {1u, 2u, 3u}) {
        ArrayData in = random_inputs(v.f, seed);
        ArrayData want = run_reference(v.f, in);
        ArrayData got = run_loopir(c.ir, v.f, in);
        if (!compare_outputs(v.f, want, got, 0.0)) ++exact;
        auto diff = compare_outputs(v.f, want, got, any_float ? 1e-5 : 0.0);
        if (diff)
          throw Failure(name + "/" + v.label + " seed " + std::to_string(seed) + ": " + *diff);
        ++runs;
      }
    }
  }
  double secs = seconds_since(t0);
  require(secs < 120.0, "took " + std::to_string(secs) + " s");
  require(kinds.size() >= 9, "directive kinds covered: " + std::to_string(kinds.size()));
  std::ostringstream os;
  os << variants << " variants x 3 seeds = " << runs << " runs (" << exact
     << " bit-exact), " << static_cast<int>(secs * 1000) << " ms";
  return {true, os.str()};
}

// ---------------------------------------------------------------------------
// C5: point preservation and schedule totality under random sequences

std::vector<Point> box_points(const std::vector<IterVar> &iters) {
  std::vector<Point> out{{}};
  for (const auto &it : iters) {
    std::vector<Point> next;
    for (const auto &p : out)
      for (int64_t v = it.lower; v < it.upper; ++v) {
        Point q = p;
        q.push_back(v);
        next.push_back(q);
      }
    out = std::move(next);
  }
  return out;
}

std::optional<ScheduleDirective::Value> random_directive(const std::vector<PolyStmt> &stmts,
                                                         std::mt19937_64 &rng, int serial) {
  const PolyStmt &s = stmts[rng() % stmts.size()];
  const auto &ds = s.domain.dims;
  if (ds.empty()) return std::nullopt;
  auto pick = [&] { return static_cast<size_t>(rng() % ds.size()); };
  auto factor = [&] { return static_cast<int64_t>(2 + rng() % 4); };
  std::string tag = "_" + std::to_string(serial);
  switch (rng() % 4) {
  case 0: {
    size_t a = pick(), b = pick();
    if (a == b) return std::nullopt;
    return InterchangeDirective{s.name, ds[a], ds[b]};
  }
  case 1: {
    const std::string &d = ds[pick()];
    return SplitDirective{s.name, d, factor(), d + "o" + tag, d + "i" + tag};
  }
  case 2: {
    if (ds.size() < 2) return std::nullopt;
    size_t a = rng() % (ds.size() - 1);
    return TileDirective{s.name, ds[a], ds[a + 1], factor(), factor(),
                         "p" + tag, "q" + tag, "u" + tag, "v" + tag};
  }
  default: {
    if (ds.size() < 2) return std::nullopt;
    size_t a = rng() % (ds.size() - 1);
    size_t b = a + 1 + rng() % (ds.size() - a - 1);
    int64_t t1 = 1 + static_cast<int64_t>(rng() % 2);
    int64_t t2 = 1 + static_cast<int64_t>(rng() % 3);
    return SkewDirective{s.name, ds[a], ds[b], t1, t2, ds[a], "w" + tag};
  }
  }
}

void check_case(const Function &f, const std::string &label) {
  auto stmts = schedule_statements(f);
  std::vector<std::set<Point>> domains;
  for (const auto &s : stmts) {
    // Point preservation: original box <-> transformed domain is a bijection.
    const auto &iters = s.body.iters;
    std::set<Point> image;
    for (const auto &p : box_points(iters)) {
      std::map<std::string, int64_t> orig;
      for (size_t k = 0; k < iters.size(); ++k) orig[iters[k].name] = p[k];
      auto cur = s.forward(orig);
      Point q;
      for (const auto &d : s.domain.dims) q.push_back(cur.at(d));
      require(s.domain.contains(q), label + ": image outside domain");
      for (const auto &it : iters)
        require(s.orig_subst.at(it.name).evaluate(cur) == orig.at(it.name),
                label + ": inverse map");
      image.insert(q);
    }
    auto pts = s.domain.enumerate();
    std::set<Point> dom(pts.begin(), pts.end());
    require(image.size() == box_points(iters).size(), label + ": map not injective");
    require(image == dom, label + ": domain has extra points");
    domains.push_back(std::move(dom));
  }

  // Totality: the loops run every instance once, in strictly increasing
  // schedule order.
  AstNode ast = build_ast(stmts);
  auto visits = enumerate_ast(ast, stmts);
  size_t width = 0;
  for (const auto &s : stmts) width = std::max(width, s.schedule.length());
  std::vector<std::set<Point>> seen(stmts.size());
  std::vector<int64_t> prev;
  for (const auto &[idx, point] : visits) {
    const PolyStmt &s = stmts[idx];
    Point q;
    for (const auto &d : s.domain.dims) q.push_back(point.at(d));
    require(domains[idx].count(q) == 1, label + ": visit outside domain");
    require(seen[idx].insert(q).second, label + ": instance visited twice");
    auto t = s.schedule.tuple(point);
    t.resize(width, 0);
    require(prev.empty() || prev < t, label + ": schedule order not strict");
    prev = t;
  }
  for (size_t k = 0; k < stmts.size(); ++k)
    require(seen[k] == domains[k], label + ": instance missed");
}

Outcome random_sequences() {
  std::mt19937_64 rng(20261019);
  std::vector<std::string> names = corpus_names();
  names.push_back("stencil");
  int cases = 0, attempts = 0, serial = 0, rejected = 0;
  while (cases < 240 && attempts < 20000) {
    ++attempts;
    const std::string &name = names[rng() % names.size()];
    Function f = load_kernel(name);
    int len = 1 + static_cast<int>(rng() % 3);
    bool ok = true;
    std::string label = name;
    for (int k = 0; k < len && ok; ++k) {
      std::vector<PolyStmt> stmts;
      try {
        stmts = schedule_statements(f);
      } catch (const CompileError &) {
        ok = false;
        break;
      }
      auto d = random_directive(stmts, rng, ++serial);
      if (!d) {
        ok = false;
        break;
      }
      f = with_directive(f, *d);
      label += " " + to_string(f.directives.back());
      for (const auto &diag : validate(f))
        ok = ok && diag.severity != Severity::Error;
    }
    if (!ok) continue;
    // Sequences the compiler rejects with a diagnostic (for example a
    // transform that separates a statement from a fused partner) are not
    // legal and are not counted.
    try {
      build_ast(schedule_statements(f));
    } catch (const CompileError &) {
      ++rejected;
      continue;
    }
    try {
      check_case(f, label);
    } catch (const CompileError &e) {
      throw Failure(label + ": " + e.what());
    }
    ++cases;
  }
  require(cases >= 200, "only " + std::to_string(cases) + " legal cases generated");
  return {true, std::to_string(cases) + " sequences checked, " + std::to_string(rejected) +
                    " rejected by the compiler, " + std::to_string(attempts) + " attempts"};
}

// ---------------------------------------------------------------------------
// C6: recurrence-constrained II

int64_t achieved_ii(const Function &f) {
  Compilation c = compile(f);
  for (const auto &n : c.estimate.nests)
    for (const auto &p : n.pipelines) return p.achieved_ii;
  throw Failure("no pipelined loop");
}

Outcome recurrence_ii() {
  Function f = load_kernel("gemm");
  int64_t add = CostTable::defaults().get("add", DataType{ScalarKind::Float, 32}).latency;
  require(add == 4, "default f32 add latency");
  int64_t before = achieved_ii(with_directive(f, PipelineDirective{"S1", "k", 1}));
  require(before == add, "II at k is " + std::to_string(before));
  Function moved = with_directive(f, InterchangeDirective{"S1", "j", "k"});
  int64_t after = achieved_ii(with_directive(moved, PipelineDirective{"S1", "j", 1}));
  require(after == 1, "II after interchange is " + std::to_string(after));
  return {true, "II 4 at the carrying loop, 1 after interchange"};
}

// ---------------------------------------------------------------------------
// C7: parallelism metric

Outcome parallelism_metric() {
  auto product = [](const std::vector<int64_t> &t) {
    int64_t p = 1;
    for (int64_t v : t) p *= v;
    return p;
  };
  require(parallelism(1, {1, 2, 16}) == Rational{product({1, 2, 16}) / 1, 1}, "[1,2,16]/1");
  require(parallelism(1, {1, 2, 16}).value() == 32.0, "32");
  require(parallelism(2, {1, 32}).value() == 16.0, "[1,32]/2");

  // The same figure from the model on a scheduled GEMM.
  Function f = load_kernel("gemm");
  f = with_directive(f, SplitDirective{"S1", "j", 2, "j0", "j1"});
  f = with_directive(f, PipelineDirective{"S1", "j0", 1});
  f = with_directive(f, UnrollDirective{"S1", "j1", 2});
  f = with_directive(f, UnrollDirective{"S1", "k", 16});
  Compilation c = compile(f);
  require(c.estimate.nests.size() == 1, "one nest");
  const auto &n = c.estimate.nests[0];
  require(n.tiles == std::vector<int64_t>({1, 2, 16}), "model tiles");
  require(n.ii == 1, "model II " + std::to_string(n.ii));
  require(n.parallel.value() == 32.0, "model parallelism " + n.parallel.str());
  return {true, "32 and 16; model GEMM [1,2,16] II 1 -> 32"};
}

// ---------------------------------------------------------------------------
// C8: DSE budget and progress, checked over the JSON report

Outcome dse_budget() {
  size_t accepted = 0;
  for (const auto &name : corpus_names()) {
    Function f = load_kernel(name);
    CompileOptions opts;
    opts.dse = true;
    opts.dse_config.model.budget.dsp = 220;
    opts.dse_config.model.budget.lut = 53200;
    opts.dse_config.model.budget.ff = 106400;
    auto t0 = std::chrono::steady_clock::now();
    Compilation c = compile(f, opts);
    require(seconds_since(t0) < 30.0, name + ": DSE over 30 s");
    ReportParts parts;
    parts.function = &f;
    parts.compilation = &c;
    parts.deps = &c.deps;
    nlohmann::json report = nlohmann::json::parse(emit_report(parts).dump());
    require(report.contains("steps") && report["steps"].is_array(), name + ": no steps");
    for (const auto &step : report["steps"]) {
      if (!step["accepted"].get<bool>()) continue;
      const auto &res = step["estimate"]["resources"];
      require(res["dsp"].get<int64_t>() <= 220, name + ": dsp over budget");
      require(res["lut"].get<int64_t>() <= 53200, name + ": lut over budget");
      require(res["ff"].get<int64_t>() <= 106400, name + ": ff over budget");
      require(step["nodeLatency"].get<int64_t>() < step["previousLatency"].get<int64_t>(),
              name + ": accepted step without latency decrease");
      ++accepted;
    }
    const auto &fin = report["final"]["resources"];
    require(fin["dsp"].get<int64_t>() <= 220 && fin["lut"].get<int64_t>() <= 53200 &&
                fin["ff"].get<int64_t>() <= 106400,
            name + ": final design over budget");
  }
  return {true, std::to_string(accepted) + " accepted steps within budget"};
}

// ---------------------------------------------------------------------------
// C9: emitted C against the interpreter, and golden pragma positions

std::string harness(const Function &f) {
  std::ostringstream os;
  os << "#include <stdio.h>\n#include <stdint.h>\n#include \"kernel.c\"\n\n";
  std::vector<const Placeholder *> io;
  for (const auto &p : f.placeholders)
    if (p.direction != ArrayDirection::Temp) io.push_back(&p);
  for (const auto *p : io) {
    os << "static " << p->dtype.c_type() << " " << p->name;
    for (int64_t s : p->shape) os << "[" << s << "]";
    os << ";\n";
  }
  os << "\nint main(int argc, char **argv) {\n"
     << "  FILE *in;\n  unsigned long n;\n"
     << "  if (argc != 2) return 2;\n"
     << "  in = fopen(argv[1], \"r\");\n  if (!in) return 3;\n";
  for (const auto *p : io) {
    std::string elt = "((" + p->dtype.c_type() + " *)" + p->name + ")[n]";
    os << "  for (n = 0; n < " << p->num_elements() << "UL; ++n) {\n";
    if (p->dtype.is_float())
      os << "    double v;\n    if (fscanf(in, \"%la\", &v) != 1) return 4;\n";
    else
      os << "    long long v;\n    if (fscanf(in, \"%lld\", &v) != 1) return 4;\n";
    os << "    " << elt << " = (" << p->dtype.c_type() << ")v;\n  }\n";
  }
  os << "  fclose(in);\n  " << f.name << "(";
  for (size_t k = 0; k < io.size(); ++k) os << (k ? ", " : "") << io[k]->name;
  os << ");\n";
  for (const auto *p : io) {
    std::string elt = "((" + p->dtype.c_type() + " *)" + p->name + ")[n]";
    os << "  for (n = 0; n < " << p->num_elements() << "UL; ++n)\n";
    if (p->dtype.is_float())
      os << "    printf(\"%a\\n\", (double)" << elt << ");\n";
    else
      os << "    printf(\"%lld\\n\", (long long)" << elt << ");\n";
  }
  os << "  return 0;\n}\n";
  return os.str();
}

void write_file(const fs::path &p, const std::string &text) {
  std::ofstream out(p);
  out << text;
  require(static_cast<bool>(out), "cannot write " + p.string());
}

std::string run_capture(const std::string &cmd) {
  std::string out;
  FILE *pipe = popen(cmd.c_str(), "r");
  require(pipe != nullptr, "popen failed");
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  require(status == 0, "command failed: " + cmd + "\n" + out);
  return out;
}

void check_compiled(const std::string &cc, const fs::path &dir, const Function &f,
                    const std::string &label) {
  Compilation c = compile(f);
  write_file(dir / "kernel.c", emit_hls_c(c.ir, f));
  write_file(dir / "main.c", harness(f));
  fs::path exe = dir / "kernel";
  run_capture(cc + " -std=c11 -pedantic -Wall -Wextra -Werror -Wno-unknown-pragmas " +
              "-ffp-contract=off -O1 -o " + exe.string() + " " + (dir / "main.c").string() +
              " 2>&1");

  ArrayData in = random_inputs(f, 7);
  std::ostringstream data;
  char buf[64];
  for (const auto &p : f.placeholders) {
    if (p.direction == ArrayDirection::Temp) continue;
    const Buffer &b = in.at(p.name);
    for (size_t k = 0; k < b.size(); ++k) {
      if (p.dtype.is_float()) {
        std::snprintf(buf, sizeof buf, "%a", b.f[k]);
        data << buf << "\n";
      } else {
        data << b.i[k] << "\n";
      }
    }
  }
  write_file(dir / "input.txt", data.str());
  std::istringstream out(run_capture(exe.string() + " " + (dir / "input.txt").string()));

  ArrayData want = run_loopir(c.ir, f, in);
  ArrayData got = in;
  for (const auto &p : f.placeholders) {
    if (p.direction == ArrayDirection::Temp) continue;
    Buffer &b = got.at(p.name);
    for (size_t k = 0; k < b.size(); ++k) {
      std::string tok;
      require(static_cast<bool>(out >> tok), label + ": short output");
      if (p.dtype.is_float()) b.f[k] = std::strtod(tok.c_str(), nullptr);
      else b.i[k] = std::strtoll(tok.c_str(), nullptr, 10);
    }
  }
  auto diff = compare_outputs(f, want, got, 0.0);
  require(!diff, label + ": C output differs: " + diff.value_or(""));
}

std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(' ');
  return a == std::string::npos ? "" : s.substr(a);
}

void golden_checks() {
  Function f = load_kernel("gemm_tiled");
  Compilation c = compile(f);
  std::string text = emit_hls_c(c.ir, f);
  std::string golden = read_file(std::string(LOOMWEAVER_GOLDEN_DIR) + "/gemm_tiled.c");
  require(text == golden, "gemm_tiled output differs from golden file");

  auto lines = lines_of(text);
  auto loop_line = [&](const std::string &iv) {
    for (size_t k = 0; k < lines.size(); ++k)
      if (trim(lines[k]).rfind("for (int " + iv + " ", 0) == 0) return k;
    throw Failure("no loop over " + iv);
  };
  size_t j0 = loop_line("j0"), i1 = loop_line("i1"), j1 = loop_line("j1");
  require(trim(lines.at(j0 + 1)) == "#pragma HLS pipeline II=1", "pipeline not first in j0");
  require(trim(lines.at(i1 + 1)) == "#pragma HLS unroll", "unroll not first in i1");
  require(trim(lines.at(j1 + 1)) == "#pragma HLS unroll", "unroll not first in j1");
  size_t part = lines.size(), first_loop = lines.size();
  for (size_t k = 0; k < lines.size(); ++k) {
    std::string t = trim(lines[k]);
    if (t == "#pragma HLS array_partition variable=A cyclic factor=4 dim=2") part = k;
    if (t.rfind("for (", 0) == 0 && first_loop == lines.size()) first_loop = k;
  }
  require(part < first_loop, "partition pragma not at function top");
  require(lines.at(part - 1).rfind("void gemm(", 0) == 0 ||
              trim(lines.at(part - 1)).rfind("#pragma HLS array_partition", 0) == 0,
          "partition pragma not directly after the signature");
}

Outcome emitted_c() {
  golden_checks();
  std::string cc = LOOMWEAVER_C_COMPILER;
  if (cc.empty()) return {true, "golden checks only (no C compiler found)"};

  auto t0 = std::chrono::steady_clock::now();
  fs::path dir = fs::temp_directory_path() / ("loomweaver_acc_" + std::to_string(getpid()));
  fs::create_directories(dir);
  size_t programs = 0;
  try {
    std::vector<std::string> names = corpus_names();
    names.push_back("gemm_i32");
    names.push_back("gemm_tiled");
    for (const auto &name : names) {
      Function base = load_kernel(name);
      for (const auto &v : directive_matrix(base)) {
        check_compiled(cc, dir, v.f, name + "/" + v.label);
        ++programs;
      }
    }
  } catch (...) {
    fs::remove_all(dir);
    throw;
  }
  fs::remove_all(dir);
  double secs = seconds_since(t0);
  require(secs < 120.0, "took " + std::to_string(secs) + " s");
  std::ostringstream os;
  os << programs << " programs compiled and matched, golden positions ok, "
     << static_cast<int>(secs) << " s";
  return {true, os.str()};
}

} // namespace

int main() {
  struct Criterion {
    const char *id;
    const char *title;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all = {
      {"C1", "split domain", split_domain},
      {"C2", "node attributes", node_attributes},
      {"C3", "bicg stage-1 trace", bicg_trace},
      {"C4", "semantic equivalence", equivalence},
      {"C5", "point preservation and totality", random_sequences},
      {"C6", "recurrence II", recurrence_ii},
      {"C7", "parallelism", parallelism_metric},
      {"C8", "dse budget", dse_budget},
      {"C9", "emitted C", emitted_c},
  };
  int failures = 0;
  for (const auto &c : all) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, e.what()};
    }
    std::cout << (o.ok ? "[PASS] " : "[FAIL] ") << c.id << " " << c.title << ": " << o.detail
              << std::endl;
    failures += o.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
