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
#include <set>

#include "loomweaver/dse.h"

namespace loomweaver {
namespace {

using Env = std::map<std::string, int64_t>;

// Statement indices grouped by outermost static, in execution order.
std::vector<std::vector<size_t>> group_nodes(const std::vector<PolyStmt> &stmts) {
  std::map<int64_t, std::vector<size_t>> groups;
  for (size_t k = 0; k < stmts.size(); ++k)
    groups[stmts[k].schedule.statics[0]].push_back(k);
  std::vector<std::vector<size_t>> out;
  for (auto &[c0, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [&](size_t a, size_t b) {
      return stmts[a].schedule.statics < stmts[b].schedule.statics;
    });
    out.push_back(members);
  }
  return out;
}

std::string node_name(const std::vector<PolyStmt> &stmts, const std::vector<size_t> &node) {
  std::string out;
  for (size_t k : node)
    out += (out.empty() ? "" : "+") + stmts[k].name;
  return out;
}

// Distance entries re-ordered to the statement's current loop order. Only
// valid while the loops are a permutation of the original iterators.
std::vector<int64_t> current_distance(const PolyStmt &s, const SelfDependence &dep) {
  const auto names = s.body.iter_names();
  std::vector<int64_t> out;
  for (const auto &d : s.domain.dims) {
    auto it = std::find(names.begin(), names.end(), d);
    out.push_back(it == names.end() ? 0 : dep.distance.entries[it - names.begin()]);
  }
  return out;
}

// Tight-carried loops first, remaining loops in their current order.
std::vector<std::string> propose_order(const PolyStmt &s, const NodeAttr &attr) {
  const auto &dims = s.domain.dims;
  int depth = static_cast<int>(dims.size());
  std::set<std::string> tight;
  for (const auto &dep : attr.self_deps) {
    if (!dep.distance.known)
      continue;
    auto d = current_distance(s, dep);
    auto nz = std::find_if(d.begin(), d.end(), [](int64_t v) { return v != 0; });
    if (nz == d.end())
      continue;
    int level = static_cast<int>(nz - d.begin());
    int64_t delta = *nz < 0 ? -*nz : *nz;
    if (level >= depth - 2 && delta <= 2)
      tight.insert(dims[level]);
  }
  std::vector<std::string> order;
  for (const auto &d : dims)
    if (tight.count(d))
      order.push_back(d);
  for (const auto &d : dims)
    if (!tight.count(d))
      order.push_back(d);
  return order;
}

// Positions of `target` in `current`.
std::vector<size_t> positions(const std::vector<std::string> &current,
                              const std::vector<std::string> &target) {
  std::vector<size_t> out;
  for (const auto &t : target)
    out.push_back(std::find(current.begin(), current.end(), t) - current.begin());
  return out;
}

// Selection-swap interchanges turning `current` into `target`.
std::vector<std::pair<std::string, std::string>> swap_sequence(std::vector<std::string> current,
                                                               const std::vector<std::string> &target) {
  std::vector<std::pair<std::string, std::string>> swaps;
  for (size_t p = 0; p < target.size(); ++p) {
    if (current[p] == target[p])
      continue;
    auto q = std::find(current.begin(), current.end(), target[p]) - current.begin();
    swaps.emplace_back(current[p], target[p]);
    std::swap(current[p], current[q]);
  }
  return swaps;
}

// Renumbers outermost statics densely, giving each statement of a split node
// its own nest.
void renumber(std::vector<PolyStmt> &stmts, const std::set<size_t> &split_members) {
  auto nodes = group_nodes(stmts);
  int64_t next = 0;
  for (const auto &node : nodes) {
    bool split = split_members.count(node.front()) > 0;
    for (size_t k : node) {
      auto &st = stmts[k].schedule.statics;
      st[0] = next;
      if (split) {
        std::fill(st.begin() + 1, st.end(), 0);
        ++next;
      }
    }
    if (!split)
      ++next;
  }
}

// Constant per-level bounds of a statement whose domain is a box in its
// current loop order; nullopt otherwise.
std::optional<std::vector<std::pair<int64_t, int64_t>>> box_bounds(const PolyStmt &s) {
  std::vector<std::pair<int64_t, int64_t>> out;
  for (const auto &d : s.domain.dims) {
    const IterVar *it = s.body.find_iter(d);
    if (!it)
      return std::nullopt;
    out.emplace_back(it->lower, it->upper);
  }
  if (!s.steps.empty())
    return std::nullopt;
  return out;
}

bool fully_fused(const std::vector<PolyStmt> &stmts, const std::vector<size_t> &node) {
  const auto &first = stmts[node.front()];
  size_t depth = first.schedule.loops.size();
  for (size_t k : node) {
    const auto &st = stmts[k].schedule.statics;
    if (stmts[k].schedule.loops.size() != depth)
      return false;
    if (!std::equal(st.begin(), st.begin() + depth, first.schedule.statics.begin()))
      return false;
  }
  return true;
}

bool can_fuse(const std::vector<PolyStmt> &stmts, const std::vector<size_t> &a,
              const std::vector<size_t> &b) {
  if (!fully_fused(stmts, a) || !fully_fused(stmts, b))
    return false;
  auto ref = box_bounds(stmts[a.front()]);
  if (!ref)
    return false;
  for (const auto *node : {&a, &b})
    for (size_t k : *node) {
      auto bb = box_bounds(stmts[k]);
      if (!bb || *bb != *ref)
        return false;
    }
  return true;
}

void fuse(std::vector<PolyStmt> &stmts, const std::vector<size_t> &a,
          const std::vector<size_t> &b) {
  const auto &lead = stmts[a.front()].schedule.statics;
  size_t depth = stmts[a.front()].schedule.loops.size();
  int64_t last = 0;
  for (size_t k : a)
    last = std::max(last, stmts[k].schedule.statics[depth]);
  std::vector<int64_t> prefix(lead.begin(), lead.begin() + depth);
  for (size_t k : b) {
    auto &st = stmts[k].schedule.statics;
    std::copy(prefix.begin(), prefix.end(), st.begin());
    st[depth] += last + 1;
  }
}

std::string fresh_name(const PolyStmt &s, const std::string &base) {
  std::string name = base;
  for (int n = 1; s.dim_position(name) >= 0; ++n)
    name = base + "_" + std::to_string(n);
  return name;
}

ScheduleDirective wrap(ScheduleDirective::Value v) { return ScheduleDirective{std::move(v), 0, 0}; }

// Per-statement view of a node shared by all of its statements.
struct NodeInfo {
  std::vector<size_t> members;
  std::string name;
  int first_compute = 0;
  bool perfect = false;
};

class Explorer {
public:
  Explorer(const Function &f, const DseConfig &cfg, std::vector<PolyStmt> base)
      : f_(f), cfg_(cfg), g_(build_dep_graph(f)), base_(std::move(base)) {
    for (const auto &members : group_nodes(base_)) {
      NodeInfo info;
      info.members = members;
      info.name = node_name(base_, members);
      info.first_compute = base_[members.front()].compute_index;
      for (size_t k : members)
        info.first_compute = std::min(info.first_compute, base_[k].compute_index);
      info.perfect = fully_fused(base_, members);
      infos_.push_back(info);
      choices_.push_back(initial_choice(info));
    }
  }

  DseResult run() {
    DseResult result;
    Evaluated cur = evaluate(choices_);
    std::set<size_t> optlist;
    for (size_t n = 0; n < infos_.size(); ++n)
      optlist.insert(n);
    // A node's first step is pipelining alone.
    std::vector<bool> pipeline_tried(infos_.size(), false);
    while (!optlist.empty()) {
      auto target = bottleneck(cur, optlist);
      if (!target)
        break;
      size_t n = *target;
      auto trial = choices_;
      if (!pipeline_tried[n]) {
        pipeline_tried[n] = true;
        trial[n].pipeline = true;
        if (try_step(n, trial, cur, result))
          choices_ = trial;
        continue;
      }
      if (!advance(trial[n])) {
        optlist.erase(n);
        continue;
      }
      trial[n].pipeline = true;
      if (try_step(n, trial, cur, result))
        choices_ = trial;
      else
        optlist.erase(n);
    }
    result.stmts = cur.stmts;
    result.partitions = cur.partitions;
    result.ir = cur.ir;
    result.estimate = cur.est;
    result.nodes = choices_;
    return result;
  }

private:
  struct Evaluated {
    std::vector<PolyStmt> stmts;
    std::vector<PartitionDirective> partitions;
    std::vector<std::vector<std::string>> node_directives;
    LoopIR ir;
    Estimate est;
    bool legal = true;
  };

  NodeChoice initial_choice(const NodeInfo &info) const {
    NodeChoice ch;
    for (size_t k : info.members)
      ch.computes.push_back(base_[k].name);
    const PolyStmt &lead = base_[info.members.front()];
    int depth = lead.depth();
    ch.factors.assign(depth, 1);
    for (const auto &d : lead.domain.dims) {
      const IterVar *it = lead.body.find_iter(d);
      ch.extents.push_back(it ? it->extent() : 1);
    }
    if (!info.perfect || !box_bounds(lead))
      return ch;
    for (int level = depth - 1; level >= 0; --level) {
      bool ok = true;
      for (size_t k : info.members) {
        const PolyStmt &s = base_[k];
        const NodeAttr &attr = g_.attrs[s.compute_index];
        std::set<std::string> reduction;
        for (int r : attr.reduction_dims)
          reduction.insert(s.body.iters[r].name);
        for (const auto &dep : attr.self_deps) {
          if (!dep.distance.known) {
            ok = false;
            break;
          }
          auto d = current_distance(s, dep);
          bool exempt = dep.reduction && cfg_.model.allow_reassoc &&
                        reduction.count(s.domain.dims[level]);
          if (d[level] != 0 && !exempt)
            ok = false;
        }
      }
      if (!ok)
        break;
      if (ch.extents[level] > 1)
        ch.levels.push_back(level);
    }
    return ch;
  }

  // Next ladder step for the innermost level that can still grow.
  bool advance(NodeChoice &ch) const {
    while (ch.ladder_level < ch.levels.size()) {
      int level = ch.levels[ch.ladder_level];
      int64_t cur = ch.factors[level];
      for (int64_t step : cfg_.ladder)
        if (step > cur && step <= ch.extents[level]) {
          ch.factors[level] = step;
          return true;
        }
      ++ch.ladder_level;
    }
    return false;
  }

  std::vector<ScheduleDirective> directives_for(const PolyStmt &s, const NodeChoice &ch) const {
    std::vector<ScheduleDirective> out;
    PolyStmt cur = s;
    std::vector<std::string> outer, inner;
    std::vector<int64_t> inner_factor, outer_extent;
    for (int p = 0; p < s.depth(); ++p) {
      const std::string &dim = s.domain.dims[p];
      int64_t f = ch.factors[p], ext = ch.extents[p];
      if (f > 1 && f < ext) {
        std::string o = fresh_name(cur, dim + "0");
        PolyStmt probe = cur;
        probe.domain.dims.push_back(o);
        std::string i = fresh_name(probe, dim + "1");
        out.push_back(wrap(SplitDirective{s.name, dim, f, o, i}));
        cur = split(cur, dim, f, o, i);
        outer.push_back(o);
        outer_extent.push_back(ceil_div(ext, f));
        inner.push_back(i);
        inner_factor.push_back(f);
      } else if (f > 1) {
        inner.push_back(dim);
        inner_factor.push_back(ext);
      } else {
        outer.push_back(dim);
        outer_extent.push_back(ext);
      }
    }
    std::vector<std::string> order = outer;
    order.insert(order.end(), inner.begin(), inner.end());
    for (const auto &[a, b] : swap_sequence(cur.domain.dims, order))
      out.push_back(wrap(InterchangeDirective{s.name, a, b}));
    if (ch.pipeline) {
      for (size_t k = outer.size(); k-- > 0;)
        if (outer_extent[k] > 1) {
          out.push_back(wrap(PipelineDirective{s.name, outer[k], 1}));
          break;
        }
    }
    for (size_t k = 0; k < inner.size(); ++k)
      out.push_back(wrap(UnrollDirective{s.name, inner[k], inner_factor[k]}));
    return out;
  }

  // Cyclic partition per array dim from the unroll factor of the iterators
  // indexing it.
  std::vector<PartitionDirective> partitions_for(const std::vector<NodeChoice> &choices) const {
    std::map<std::string, std::vector<int64_t>> factors;
    for (size_t n = 0; n < infos_.size(); ++n) {
      for (size_t k : infos_[n].members) {
        const PolyStmt &s = base_[k];
        std::map<std::string, int64_t> unroll;
        for (int p = 0; p < s.depth(); ++p)
          unroll[s.domain.dims[p]] = choices[n].factors[p];
        auto visit = [&](const std::string &array, const std::vector<AffineExpr> &idx) {
          const Placeholder *ph = f_.find_array(array);
          auto &fs = factors[array];
          fs.resize(ph->shape.size(), 1);
          for (size_t d = 0; d < idx.size(); ++d)
            for (const auto &[var, c] : idx[d].coeffs()) {
              auto it = unroll.find(var);
              if (it != unroll.end())
                fs[d] = std::min(ph->shape[d], std::max(fs[d], it->second));
            }
        };
        visit(s.body.dest.array, s.body.dest.indices);
        for_each_load(*s.body.rhs, [&](const Expr &e) { visit(e.array, e.indices); });
      }
    }
    std::vector<PartitionDirective> out;
    for (const auto &[array, fs] : factors)
      if (std::any_of(fs.begin(), fs.end(), [](int64_t v) { return v > 1; }))
        out.push_back({array, fs, PartitionType::Cyclic});
    return out;
  }

  Evaluated evaluate(const std::vector<NodeChoice> &choices) const {
    Evaluated ev;
    ev.stmts = base_;
    bool reordered = false;
    for (size_t n = 0; n < infos_.size(); ++n) {
      std::vector<std::string> texts;
      for (size_t k : infos_[n].members) {
        auto ds = directives_for(base_[k], choices[n]);
        for (const auto &d : ds) {
          texts.push_back(to_string(d));
          if (d.is_loop_transform()) {
            apply_directive(ev.stmts, d);
            reordered = true;
          } else {
            annotate(ev.stmts, d);
          }
        }
      }
      ev.node_directives.push_back(texts);
    }
    ev.partitions = partitions_for(choices);
    if (reordered && !preserves_order(f_, ev.stmts, cfg_.oracle_cap)) {
      ev.legal = false;
      return ev;
    }
    ev.ir = lower_statements(f_, ev.stmts, ev.partitions);
    ev.est = estimate_function(ev.ir, f_, g_, cfg_.model);
    return ev;
  }

  int64_t node_latency(const Evaluated &ev, size_t n) const {
    int c = base_[infos_[n].members.front()].compute_index;
    for (const auto &nest : ev.est.nests)
      if (std::find(nest.computes.begin(), nest.computes.end(), c) != nest.computes.end())
        return nest.latency;
    return 0;
  }

  bool try_step(size_t n, const std::vector<NodeChoice> &trial, Evaluated &cur,
                DseResult &result) const {
    Evaluated next = evaluate(trial);
    DseStep step;
    step.node = infos_[n].name;
    step.previous_latency = node_latency(cur, n);
    if (next.legal) {
      step.directives = next.node_directives[n];
      for (const auto &p : next.partitions)
        step.directives.push_back(to_string(wrap(p)));
      step.node_latency = node_latency(next, n);
      step.estimate = next.est;
      step.accepted = next.est.resources.fits(cfg_.model.budget) &&
                      step.node_latency < step.previous_latency;
    } else {
      step.directives = {"illegal reordering"};
    }
    result.steps.push_back(step);
    if (step.accepted)
      cur = std::move(next);
    return step.accepted;
  }

  std::optional<size_t> bottleneck(const Evaluated &ev, const std::set<size_t> &optlist) const {
    std::map<int, size_t> node_of;
    for (size_t n = 0; n < infos_.size(); ++n)
      for (size_t k : infos_[n].members)
        node_of[base_[k].compute_index] = n;
    std::vector<size_t> order(ev.est.paths.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return ev.est.path_latency[a] > ev.est.path_latency[b];
    });
    for (size_t p : order) {
      std::optional<size_t> best;
      int64_t best_lat = -1;
      for (int c : ev.est.paths[p]) {
        size_t n = node_of.at(c);
        if (!optlist.count(n))
          continue;
        int64_t lat = node_latency(ev, n);
        if (lat > best_lat ||
            (lat == best_lat && infos_[n].first_compute < infos_[*best].first_compute)) {
          best = n;
          best_lat = lat;
        }
      }
      if (best)
        return best;
    }
    if (!optlist.empty())
      return *optlist.begin();
    return std::nullopt;
  }

  const Function &f_;
  const DseConfig &cfg_;
  DepGraph g_;
  std::vector<PolyStmt> base_;
  std::vector<NodeInfo> infos_;
  std::vector<NodeChoice> choices_;
};

} // namespace

std::string Stage1Step::str() const {
  std::string args;
  for (const auto &c : computes)
    args += (args.empty() ? "" : ",") + c;
  switch (kind) {
  case Kind::Split:
    return "split(" + args + ")";
  case Kind::Interchange:
    return "interchange(" + args + "," + dim_a + "," + dim_b + ")";
  case Kind::Fuse:
    return "fuse(" + args + ")";
  }
  return "";
}

bool preserves_order(const Function &f, const std::vector<PolyStmt> &stmts, int64_t cap) {
  std::vector<PolyStmt> ref = reference_statements(f);
  std::vector<std::vector<int64_t>> ref_time, new_time;
  using Cell = std::pair<std::string, std::vector<int64_t>>;
  std::map<Cell, std::vector<std::pair<size_t, bool>>> cells;
  for (const auto &s : stmts) {
    const Compute &c = f.computes[s.compute_index];
    std::vector<IterVar> clamped = c.iters;
    for (auto &it : clamped)
      it.upper = std::min(it.upper, it.lower + cap);
    auto names = c.iter_names();
    for (const auto &p : IntegerSet::box(clamped).enumerate()) {
      Env env;
      for (size_t k = 0; k < names.size(); ++k)
        env[names[k]] = p[k];
      size_t id = ref_time.size();
      ref_time.push_back(ref[s.compute_index].time_of(env));
      new_time.push_back(s.time_of(env));
      auto cell = [&](const std::string &a, const std::vector<AffineExpr> &idx) {
        std::vector<int64_t> v;
        for (const auto &e : idx)
          v.push_back(e.evaluate(env));
        return Cell{a, v};
      };
      cells[cell(c.dest.array, c.dest.indices)].push_back({id, true});
      for_each_load(*c.rhs, [&](const Expr &e) {
        cells[cell(e.array, e.indices)].push_back({id, false});
      });
    }
  }
  auto ranks = [](std::vector<std::vector<int64_t>> times, bool &distinct) {
    size_t len = 0;
    for (const auto &t : times)
      len = std::max(len, t.size());
    for (auto &t : times)
      t.resize(len, 0);
    std::vector<size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return times[a] < times[b]; });
    std::vector<size_t> rank(times.size());
    distinct = true;
    for (size_t k = 0; k < order.size(); ++k) {
      rank[order[k]] = k;
      if (k && times[order[k]] == times[order[k - 1]])
        distinct = false;
    }
    return rank;
  };
  bool ref_distinct = true, new_distinct = true;
  auto rr = ranks(ref_time, ref_distinct);
  auto nr = ranks(new_time, new_distinct);
  if (!new_distinct)
    return false;
  for (const auto &[cell, uses] : cells) {
    bool any_write = std::any_of(uses.begin(), uses.end(), [](const auto &u) { return u.second; });
    if (!any_write)
      continue;
    for (size_t a = 0; a < uses.size(); ++a)
      for (size_t b = a + 1; b < uses.size(); ++b) {
        auto [x, wx] = uses[a];
        auto [y, wy] = uses[b];
        if (x == y || !(wx || wy))
          continue;
        if ((rr[x] < rr[y]) != (nr[x] < nr[y]))
          return false;
      }
  }
  return true;
}

Stage1Result stage1_transform(const Function &f, std::vector<PolyStmt> stmts,
                              const DseConfig &cfg) {
  Stage1Result result;
  DepGraph g = build_dep_graph(f);
  std::set<std::string> rejected;
  auto legal = [&](const std::vector<PolyStmt> &s) {
    return preserves_order(f, s, cfg.oracle_cap);
  };
  for (int iter = 0; iter < cfg.max_stage1_iterations; ++iter) {
    bool changed = false;
    auto nodes = group_nodes(stmts);

    // Splits of nodes whose statements want different loop orders.
    std::set<size_t> split_members;
    std::vector<std::vector<size_t>> to_interchange;
    std::map<size_t, std::vector<std::string>> proposals;
    for (const auto &node : nodes) {
      bool wants_change = false;
      std::optional<std::vector<size_t>> common;
      bool agree = true;
      for (size_t k : node) {
        auto p = propose_order(stmts[k], g.attrs[stmts[k].compute_index]);
        proposals[k] = p;
        wants_change = wants_change || p != stmts[k].domain.dims;
        auto pos = positions(stmts[k].domain.dims, p);
        if (!common)
          common = pos;
        else if (*common != pos)
          agree = false;
      }
      if (!wants_change)
        continue;
      std::string key = node_name(stmts, node);
      if (node.size() > 1 && !agree) {
        if (!rejected.count("split:" + key))
          for (size_t k : node)
            split_members.insert(k);
      } else if (!rejected.count("interchange:" + key)) {
        to_interchange.push_back(node);
      }
    }
    if (!split_members.empty()) {
      for (const auto &node : nodes) {
        if (!split_members.count(node.front()))
          continue;
        auto trial = stmts;
        renumber(trial, {node.begin(), node.end()});
        Stage1Step step{Stage1Step::Kind::Split, {}, "", ""};
        for (size_t k : node)
          step.computes.push_back(stmts[k].name);
        if (legal(trial)) {
          stmts = trial;
          result.trace.push_back(step);
          changed = true;
        } else {
          rejected.insert("split:" + node_name(stmts, node));
        }
      }
    }
    for (const auto &node : to_interchange) {
      auto trial = stmts;
      std::vector<Stage1Step> steps;
      for (size_t k : node)
        for (const auto &[a, b] : swap_sequence(trial[k].domain.dims, proposals[k])) {
          trial[k] = interchange(trial[k], a, b);
          steps.push_back({Stage1Step::Kind::Interchange, {trial[k].name}, a, b});
        }
      if (legal(trial)) {
        stmts = trial;
        result.trace.insert(result.trace.end(), steps.begin(), steps.end());
        changed = true;
      } else {
        rejected.insert("interchange:" + node_name(stmts, node));
      }
    }
    if (changed)
      continue;

    // Conservative fusion of adjacent nests.
    nodes = group_nodes(stmts);
    for (size_t n = 0; n + 1 < nodes.size(); ++n) {
      const auto &a = nodes[n], &b = nodes[n + 1];
      std::string key = "fuse:" + node_name(stmts, a) + "|" + node_name(stmts, b);
      if (rejected.count(key) || !can_fuse(stmts, a, b))
        continue;
      auto trial = stmts;
      fuse(trial, a, b);
      renumber(trial, {});
      if (!legal(trial)) {
        rejected.insert(key);
        continue;
      }
      Stage1Step step{Stage1Step::Kind::Fuse, {}, "", ""};
      for (const auto *node : {&a, &b})
        for (size_t k : *node)
          step.computes.push_back(stmts[k].name);
      stmts = trial;
      result.trace.push_back(step);
      changed = true;
      break;
    }
    if (!changed)
      break;
  }
  result.stmts = std::move(stmts);
  return result;
}

DseResult auto_dse(const Function &f, const DseConfig &cfg) {
  std::vector<Diagnostic> warnings;
  for (const auto &d : f.directives)
    if (!std::holds_alternative<AfterDirective>(d.value) &&
        !std::holds_alternative<AutoDseDirective>(d.value))
      warnings.push_back(warning("directive '" + to_string(d) + "' ignored under DSE"));
  if (f.computes.empty()) {
    DseResult r;
    r.ir = lower_statements(f, {}, {});
    r.warnings = warnings;
    return r;
  }
  Stage1Result s1 = stage1_transform(f, reference_statements(f), cfg);
  Explorer ex(f, cfg, s1.stmts);
  DseResult r = ex.run();
  r.trace = s1.trace;
  r.warnings = warnings;
  return r;
}

} // namespace loomweaver
