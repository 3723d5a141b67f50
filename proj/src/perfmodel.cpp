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
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "loomweaver/perfmodel.h"

namespace loomweaver {
namespace {

constexpr int64_t kBramBits = 18432;
constexpr size_t kMaxSamples = 8192;

int64_t ceil_log2(int64_t m) {
  int64_t k = 0;
  while ((int64_t{1} << k) < m)
    ++k;
  return k;
}

const char *op_name(Expr::BinOp op) {
  switch (op) {
  case Expr::BinOp::Add:
  case Expr::BinOp::Sub:
    return "add";
  case Expr::BinOp::Mul:
    return "mul";
  case Expr::BinOp::Div:
    return "div";
  }
  return "add";
}

int64_t expr_depth(const Expr &e, const DataType &ctx, const CostTable &costs) {
  switch (e.kind) {
  case Expr::Kind::Constant:
  case Expr::Kind::Index:
    return 0;
  case Expr::Kind::Load:
    return costs.get("load", ctx).latency;
  case Expr::Kind::Negate:
    return expr_depth(*e.lhs, ctx, costs);
  case Expr::Kind::Binary:
    return std::max(expr_depth(*e.lhs, ctx, costs), expr_depth(*e.rhs, ctx, costs)) +
           costs.get(op_name(e.op), ctx).latency;
  }
  return 0;
}

// Latency from the `target`-th load up to `e`; -1 when the load is not below.
int64_t chain_from_load(const Expr &e, int target, int &counter, const DataType &ctx,
                        const CostTable &costs) {
  switch (e.kind) {
  case Expr::Kind::Load:
    return counter++ == target ? 0 : -1;
  case Expr::Kind::Negate:
    return chain_from_load(*e.lhs, target, counter, ctx, costs);
  case Expr::Kind::Binary: {
    int64_t l = chain_from_load(*e.lhs, target, counter, ctx, costs);
    int64_t r = chain_from_load(*e.rhs, target, counter, ctx, costs);
    int64_t below = std::max(l, r);
    return below < 0 ? -1 : below + costs.get(op_name(e.op), ctx).latency;
  }
  default:
    return -1;
  }
}

Resources op_resources(const Expr &e, const DataType &ctx, const CostTable &costs) {
  Resources r;
  if (e.kind == Expr::Kind::Binary) {
    const OpCost &c = costs.get(op_name(e.op), ctx);
    r += Resources{c.dsp, c.lut, c.ff, 0};
    r += op_resources(*e.lhs, ctx, costs);
    r += op_resources(*e.rhs, ctx, costs);
  } else if (e.kind == Expr::Kind::Negate) {
    r += op_resources(*e.lhs, ctx, costs);
  }
  return r;
}

Resources statement_resources(const Compute &c, const DataType &ctx, const CostTable &costs) {
  Resources r = op_resources(*c.rhs, ctx, costs);
  if (c.op == StmtOp::Accumulate) {
    const OpCost &a = costs.get("add", ctx);
    r += Resources{a.dsp, a.lut, a.ff, 0};
  }
  return r;
}

// Range of a bound expression given constant ranges of the ivs it uses.
int64_t trip_of(const LoopNode &l, const IvBox &box) {
  IvRange r = loop_range(l, box);
  return std::max<int64_t>(0, r.hi - r.lo + 1);
}

int64_t unroll_of(const LoopNode &l, int64_t trip) {
  if (const PragmaAttr *u = l.find(PragmaAttr::Kind::Unroll))
    return u->full ? std::max<int64_t>(trip, 1) : u->value;
  return 1;
}

struct StmtSite {
  const StmtNode *stmt;
  std::vector<const LoopNode *> loops; // root to innermost
};

class NodeModel {
public:
  NodeModel(const Function &f, const DepGraph &g, const ModelConfig &cfg, NestEstimate &est)
      : f_(f), g_(g), cfg_(cfg), est_(est) {}

  int64_t latency(const std::vector<Node> &nodes) {
    int64_t sum = 0;
    for (const auto &n : nodes)
      sum += latency(n);
    return sum;
  }

  int64_t latency(const Node &n) {
    if (auto *s = std::get_if<StmtNode>(&n.value))
      return depth_of(*s);
    if (auto *i = std::get_if<IfNode>(&n.value))
      return latency(i->body);
    const auto &l = std::get<LoopNode>(n.value);
    int64_t trip = trip_of(l, box_);
    IvRange r = loop_range(l, box_);
    stack_.push_back(&l);
    box_[l.iv] = {r.lo, r.hi};
    int64_t out;
    if (const PragmaAttr *p = l.find(PragmaAttr::Kind::Pipeline))
      out = pipelined(l, *p);
    else
      out = ceil_div(trip, unroll_of(l, trip)) * latency(l.body);
    box_.erase(l.iv);
    stack_.pop_back();
    return out;
  }

  std::map<std::string, int64_t> trips; // iv -> max trip, filled during traversal

private:
  DataType ctx_of(const StmtNode &s) const { return f_.find_array(s.dest.array)->dtype; }
  const Compute &compute_of(const StmtNode &s) const { return f_.computes[s.compute_index]; }

  int64_t depth_of(const StmtNode &s) const {
    return statement_depth(compute_of(s), ctx_of(s), cfg_.costs);
  }

  // Flattened pipeline iterations of `nodes` (loop children only).
  int64_t inner_iterations(const std::vector<Node> &nodes, IvBox &box) {
    int64_t sum = 0;
    for (const auto &n : nodes) {
      if (auto *l = std::get_if<LoopNode>(&n.value)) {
        int64_t trip = trip_of(*l, box);
        IvRange r = loop_range(*l, box);
        box[l->iv] = {r.lo, r.hi};
        sum += ceil_div(trip, unroll_of(*l, trip)) * inner_iterations(l->body, box);
        box.erase(l->iv);
      } else if (auto *i = std::get_if<IfNode>(&n.value)) {
        sum += inner_iterations(i->body, box) - 1;
      }
    }
    return std::max<int64_t>(sum, 1);
  }

  void collect(const std::vector<Node> &nodes, std::vector<const LoopNode *> &loops,
               std::vector<StmtSite> &out) {
    for (const auto &n : nodes) {
      if (auto *l = std::get_if<LoopNode>(&n.value)) {
        loops.push_back(l);
        collect(l->body, loops, out);
        loops.pop_back();
      } else if (auto *i = std::get_if<IfNode>(&n.value)) {
        collect(i->body, loops, out);
      } else {
        out.push_back({&std::get<StmtNode>(n.value), loops});
      }
    }
  }

  int64_t pipelined(const LoopNode &l, const PragmaAttr &p) {
    IvBox box = box_;
    int64_t trip = trip_of(l, box_);
    int64_t n = ceil_div(trip, unroll_of(l, trip)) * inner_iterations(l.body, box);
    std::vector<StmtSite> sites;
    std::vector<const LoopNode *> loops = stack_;
    collect(l.body, loops, sites);
    int64_t depth = 1, rec = 0;
    size_t level = stack_.size() - 1;
    for (const auto &site : sites) {
      depth = std::max(depth, depth_of(*site.stmt));
      rec = std::max(rec, recurrence_ii(site, level));
    }
    PipelineEstimate pe;
    pe.iv = l.iv;
    pe.target_ii = p.value;
    pe.recurrence_ii = rec;
    pe.achieved_ii = std::max(p.value, rec);
    pe.iterations = n;
    pe.depth = depth;
    est_.pipelines.push_back(pe);
    return (n - 1) * pe.achieved_ii + depth;
  }

  // Worst ceil(chain / distance) over sampled dependence pairs, where the
  // distance counts pipeline iterations of the loop at `level`.
  int64_t recurrence_ii(const StmtSite &site, size_t level) {
    const StmtNode &s = *site.stmt;
    const Compute &c = compute_of(s);
    DataType ctx = ctx_of(s);
    const NodeAttr &attr = g_.attrs[s.compute_index];
    int64_t worst = 0;
    if (attr.self_deps.empty())
      return 0;

    // Box of all ivs on the statement's loop stack.
    IvBox box;
    std::vector<int64_t> trip(site.loops.size()), unroll(site.loops.size());
    for (size_t k = 0; k < site.loops.size(); ++k) {
      const LoopNode &lp = *site.loops[k];
      IvRange r = loop_range(lp, box);
      box[lp.iv] = r;
      trip[k] = std::max<int64_t>(1, r.hi - r.lo + 1);
      unroll[k] = unroll_of(lp, trip[k]);
    }

    auto points = IntegerSet::box(c.iters).enumerate();
    size_t stride = std::max<size_t>(1, points.size() / kMaxSamples);
    auto iv_values = [&](const std::vector<int64_t> &p) {
      std::map<std::string, int64_t> orig;
      for (size_t k = 0; k < c.iters.size(); ++k)
        orig[c.iters[k].name] = p[k];
      auto cur = apply_steps(s.steps, orig);
      std::map<std::string, int64_t> ivs;
      for (const auto &[dim, v] : cur)
        ivs[s.dim_to_iv.at(dim)] = v;
      return ivs;
    };

    for (const auto &dep : attr.self_deps) {
      int64_t chain = dependence_chain(c, dep, ctx, cfg_.costs);
      if (!dep.distance.known) {
        worst = std::max(worst, chain);
        continue;
      }
      bool reassoc = dep.reduction && cfg_.allow_reassoc;
      int64_t add_lat = cfg_.costs.get("add", ctx).latency;
      for (size_t pi = 0; pi < points.size(); pi += stride) {
        const auto &x = points[pi];
        std::vector<int64_t> y = x;
        bool inside = true;
        for (size_t k = 0; k < y.size(); ++k) {
          y[k] += dep.distance.entries[k];
          inside = inside && y[k] >= c.iters[k].lower && y[k] < c.iters[k].upper;
        }
        if (!inside)
          continue;
        auto vx = iv_values(x), vy = iv_values(y);
        bool same_outer = true;
        for (size_t k = 0; k < level; ++k)
          same_outer = same_outer && vx.at(site.loops[k]->iv) == vy.at(site.loops[k]->iv);
        if (!same_outer)
          continue;
        int64_t ix = 0, iy = 0, mult = 1;
        for (size_t k = level; k < site.loops.size(); ++k) {
          const LoopNode &lp = *site.loops[k];
          int64_t radix = ceil_div(trip[k], unroll[k]);
          int64_t lx = lp.lower.evaluate(vx, true), ly = lp.lower.evaluate(vy, true);
          ix = ix * radix + floor_div(vx.at(lp.iv) - lx, unroll[k]);
          iy = iy * radix + floor_div(vy.at(lp.iv) - ly, unroll[k]);
          if (vx.at(lp.iv) != vy.at(lp.iv))
            mult *= unroll[k];
        }
        int64_t dist = iy - ix;
        if (dist < 1)
          continue;
        int64_t eff = reassoc ? chain + add_lat * ceil_log2(mult) : chain * mult;
        worst = std::max(worst, ceil_div(eff, dist));
      }
    }
    return worst;
  }

  const Function &f_;
  const DepGraph &g_;
  const ModelConfig &cfg_;
  NestEstimate &est_;
  std::vector<const LoopNode *> stack_;
  IvBox box_;
};

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Original iterator a current dim derives from.
std::map<std::string, std::string> dim_origins(const StmtNode &s, const Compute &c) {
  std::map<std::string, std::string> src;
  for (const auto &it : c.iters)
    src[it.name] = it.name;
  for (const auto &st : s.steps) {
    if (st.kind == DimStep::Kind::Split) {
      std::string o = src[st.src_a];
      src[st.dst_a] = o;
      src[st.dst_b] = o;
    } else {
      std::string oi = src[st.src_a], oj = src[st.src_b];
      src[st.dst_a] = oi;
      src[st.dst_b] = oj;
    }
  }
  return src;
}

} // namespace

Resources &Resources::operator+=(const Resources &o) {
  dsp += o.dsp;
  lut += o.lut;
  ff += o.ff;
  bram += o.bram;
  return *this;
}

Resources Resources::operator*(int64_t k) const { return {dsp * k, lut * k, ff * k, bram * k}; }

bool Resources::fits(const Resources &b) const {
  return dsp <= b.dsp && lut <= b.lut && ff <= b.ff && bram <= b.bram;
}

Resources default_budget() { return {220, 53200, 106400, 280}; }

CostTable CostTable::defaults() {
  CostTable t;
  t.set("add.f32", {4, 2, 214, 227});
  t.set("mul.f32", {3, 3, 135, 128});
  t.set("div.f32", {16, 0, 761, 1058});
  t.set("add.f64", {5, 3, 445, 645});
  t.set("mul.f64", {4, 11, 208, 342});
  t.set("div.f64", {16, 0, 3133, 3211});
  t.set("add.int", {1, 0, 39, 32});
  t.set("mul.int", {3, 3, 45, 64});
  t.set("div.int", {16, 0, 1024, 1100});
  t.set("load", {2, 0, 0, 0});
  t.set("store", {1, 0, 0, 0});
  return t;
}

const OpCost &CostTable::get(const std::string &op, const DataType &t) const {
  auto it = entries_.find(op + "." + t.str());
  if (it == entries_.end() && !t.is_float())
    it = entries_.find(op + ".int");
  if (it == entries_.end())
    it = entries_.find(op);
  if (it == entries_.end())
    throw CompileError("cost table has no entry for '" + op + "." + t.str() + "'");
  return it->second;
}

void CostTable::load(const std::string &text, Resources *budget) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (const char *marker : {"#", "//"}) {
      size_t c = line.find(marker);
      if (c != std::string::npos)
        line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty())
      continue;
    auto bad = [&](const std::string &why) {
      throw CompileError(error_at(lineno, 1, "cost table: " + why));
    };
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      bad("expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    int64_t v = 0;
    auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc() || res.ptr != val.data() + val.size() || v < 0)
      bad("value for '" + key + "' must be a non-negative integer");
    size_t dot = key.rfind('.');
    if (dot == std::string::npos || dot == 0)
      bad("key '" + key + "' needs a field suffix");
    std::string prefix = key.substr(0, dot), field = key.substr(dot + 1);
    if (prefix == "budget") {
      if (!budget)
        continue;
      if (field == "dsp")
        budget->dsp = v;
      else if (field == "lut")
        budget->lut = v;
      else if (field == "ff")
        budget->ff = v;
      else if (field == "bram")
        budget->bram = v;
      else
        bad("unknown budget resource '" + field + "'");
      continue;
    }
    std::string op = prefix.substr(0, prefix.find('.'));
    if (op != "add" && op != "mul" && op != "div" && op != "load" && op != "store")
      bad("unknown operation '" + op + "'");
    OpCost &c = entries_[prefix];
    if (field == "latency") {
      if (v < 1)
        bad("latency must be at least 1");
      c.latency = v;
    } else if (field == "dsp") {
      c.dsp = v;
    } else if (field == "lut") {
      c.lut = v;
    } else if (field == "ff") {
      c.ff = v;
    } else {
      bad("unknown field '" + field + "'");
    }
  }
}

void CostTable::load_file(const std::string &path, Resources *budget) {
  std::ifstream in(path);
  if (!in)
    throw CompileError("cannot read cost table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  load(ss.str(), budget);
}

std::string Rational::str() const {
  if (den == 1)
    return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational parallelism(int64_t achieved_ii, const std::vector<int64_t> &tiles) {
  int64_t num = 1;
  for (int64_t t : tiles)
    num *= t;
  int64_t den = std::max<int64_t>(achieved_ii, 1);
  int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

int64_t statement_depth(const Compute &c, const DataType &ctx, const CostTable &costs) {
  int64_t rhs = expr_depth(*c.rhs, ctx, costs);
  if (c.op == StmtOp::Accumulate)
    rhs = std::max(rhs, costs.get("load", ctx).latency) + costs.get("add", ctx).latency;
  return rhs + costs.get("store", ctx).latency;
}

int64_t dependence_chain(const Compute &c, const SelfDependence &dep, const DataType &ctx,
                         const CostTable &costs) {
  int64_t add = c.op == StmtOp::Accumulate ? costs.get("add", ctx).latency : 0;
  if (dep.load_index < 0)
    return std::max<int64_t>(1, add);
  int counter = 0;
  int64_t up = chain_from_load(*c.rhs, dep.load_index, counter, ctx, costs);
  return std::max<int64_t>(1, std::max<int64_t>(up, 0) + add);
}

NestEstimate estimate_node(const Node &root, const Function &f, const DepGraph &g,
                           const ModelConfig &cfg) {
  NestEstimate est;
  NodeModel model(f, g, cfg, est);
  est.latency = std::max<int64_t>(1, model.latency(root));

  // Resources and tiles from statement sites.
  std::vector<StmtSite> sites;
  std::function<void(const Node &, std::vector<const LoopNode *> &)> collect =
      [&](const Node &n, std::vector<const LoopNode *> &loops) {
        if (auto *l = std::get_if<LoopNode>(&n.value)) {
          loops.push_back(l);
          for (const auto &c : l->body)
            collect(c, loops);
          loops.pop_back();
        } else if (auto *i = std::get_if<IfNode>(&n.value)) {
          for (const auto &c : i->body)
            collect(c, loops);
        } else {
          sites.push_back({&std::get<StmtNode>(n.value), loops});
        }
      };
  std::vector<const LoopNode *> loops;
  collect(root, loops);

  std::set<int> computes;
  for (const auto &site : sites) {
    const Compute &c = f.computes[site.stmt->compute_index];
    DataType ctx = f.find_array(c.dest.array)->dtype;
    IvBox box;
    int64_t copies = 1;
    for (const LoopNode *lp : site.loops) {
      int64_t trip = trip_of(*lp, box);
      box[lp->iv] = loop_range(*lp, box);
      copies *= unroll_of(*lp, trip);
    }
    est.resources += statement_resources(c, ctx, cfg.costs) * copies;
    computes.insert(site.stmt->compute_index);
  }
  est.computes.assign(computes.begin(), computes.end());

  if (!sites.empty()) {
    const StmtSite &first = sites.front();
    const Compute &c = f.computes[first.stmt->compute_index];
    auto origins = dim_origins(*first.stmt, c);
    std::map<std::string, int64_t> per_iter;
    for (const auto &it : c.iters)
      per_iter[it.name] = 1;
    IvBox box;
    for (const LoopNode *lp : first.loops) {
      int64_t trip = trip_of(*lp, box);
      box[lp->iv] = loop_range(*lp, box);
      for (const auto &[dim, iv] : first.stmt->dim_to_iv)
        if (iv == lp->iv)
          per_iter[origins[dim]] *= unroll_of(*lp, trip);
    }
    for (const auto &it : c.iters)
      est.tiles.push_back(per_iter[it.name]);
  }
  for (const auto &p : est.pipelines)
    est.ii = std::max(est.ii, p.achieved_ii);
  est.parallel = parallelism(est.ii, est.tiles);
  return est;
}

Resources memory_resources(const LoopIR &ir) {
  Resources r;
  for (const auto &a : ir.arrays) {
    int64_t bits = a.array.num_elements() * a.array.dtype.bits;
    int64_t banks = 1;
    for (int d = 1; d <= a.array.rank(); ++d)
      banks *= a.factor_for(d);
    r.bram += banks * ceil_div(ceil_div(bits, banks), kBramBits);
  }
  return r;
}

Estimate estimate_function(const LoopIR &ir, const Function &f, const DepGraph &g,
                           const ModelConfig &cfg) {
  Estimate est;
  std::map<int, size_t> nest_of;
  for (const auto &root : ir.roots) {
    est.nests.push_back(estimate_node(root, f, g, cfg));
    for (int c : est.nests.back().computes)
      nest_of[c] = est.nests.size() - 1;
  }
  est.paths = collect_paths(g);
  for (const auto &path : est.paths) {
    std::set<size_t> seen;
    int64_t sum = 0;
    for (int c : path) {
      auto it = nest_of.find(c);
      if (it != nest_of.end() && seen.insert(it->second).second)
        sum += est.nests[it->second].latency;
    }
    est.path_latency.push_back(sum);
    est.latency = std::max(est.latency, sum);
  }
  for (const auto &n : est.nests) {
    if (cfg.reuse) {
      est.resources.dsp = std::max(est.resources.dsp, n.resources.dsp);
      est.resources.lut += n.resources.lut;
      est.resources.ff += n.resources.ff;
    } else {
      est.resources += n.resources;
    }
  }
  est.resources += memory_resources(ir);
  return est;
}

} // namespace loomweaver
