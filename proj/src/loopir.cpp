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
#include <sstream>

#include "loomweaver/loopir.h"

namespace loomweaver {
namespace {

[[noreturn]] void fail(const std::string &msg) { throw CompileError(msg); }

IvRange range_of(const AffineExpr &e, const IvBox &box) {
  IvRange r{e.constant(), e.constant()};
  for (const auto &[n, k] : e.coeffs()) {
    auto it = box.find(n);
    if (it == box.end())
      fail("bound refers to unknown loop '" + n + "'");
    int64_t a = wrap_mul(k, it->second.lo), b = wrap_mul(k, it->second.hi);
    r.lo = wrap_add(r.lo, std::min(a, b));
    r.hi = wrap_add(r.hi, std::max(a, b));
  }
  return r;
}

IvRange range_of(const BoundExpr &b, const IvBox &box, bool is_lower) {
  if (b.kind == BoundExpr::Kind::Term) {
    IvRange r = range_of(b.term.num, box);
    if (is_lower)
      return {ceil_div(r.lo, b.term.den), ceil_div(r.hi, b.term.den)};
    return {floor_div(r.lo, b.term.den), floor_div(r.hi, b.term.den)};
  }
  IvRange acc = range_of(b.args.front(), box, is_lower);
  for (size_t i = 1; i < b.args.size(); ++i) {
    IvRange r = range_of(b.args[i], box, is_lower);
    if (b.kind == BoundExpr::Kind::Max)
      acc = {std::max(acc.lo, r.lo), std::max(acc.hi, r.hi)};
    else
      acc = {std::min(acc.lo, r.lo), std::min(acc.hi, r.hi)};
  }
  return acc;
}

// Largest possible trip count of `loop` over the box.
int64_t max_trip(const LoopNode &loop, const IvBox &box) {
  IvRange lo = range_of(loop.lower, box, true);
  IvRange hi = range_of(loop.upper, box, false);
  return std::max<int64_t>(0, hi.hi - lo.lo + 1);
}

void add_attr(LoopNode &loop, PragmaAttr a) {
  for (auto &e : loop.attrs)
    if (e.kind == a.kind) {
      if (e.value != a.value)
        fail(std::string("conflicting ") +
             (a.kind == PragmaAttr::Kind::Pipeline ? "pipeline" : "unroll") +
             " attributes on loop '" + loop.iv + "'");
      return;
    }
  loop.attrs.push_back(a);
}

PragmaAttr make_attr(const HwAnnotation &a, int64_t trip, const std::string &iv) {
  PragmaAttr p;
  p.value = a.value;
  if (a.kind == HwAnnotation::Kind::Pipeline) {
    p.kind = PragmaAttr::Kind::Pipeline;
    if (a.value < 1)
      fail("pipeline II must be at least 1");
    return p;
  }
  p.kind = PragmaAttr::Kind::Unroll;
  if (a.value < 1)
    fail("unroll factor must be at least 1");
  if (a.value > trip)
    fail("unroll factor " + std::to_string(a.value) + " exceeds trip count " +
         std::to_string(trip) + " of loop '" + iv + "'");
  p.full = a.value == trip;
  return p;
}

class Lowerer {
public:
  Lowerer(const std::vector<PolyStmt> &stmts) : stmts_(stmts) {}

  std::vector<Node> lower(const AstNode &n, IvBox &box) {
    std::vector<Node> out;
    switch (n.kind) {
    case AstNode::Kind::Block:
      for (const auto &c : n.children) {
        auto sub = lower(c, box);
        for (auto &s : sub)
          out.push_back(std::move(s));
      }
      return out;
    case AstNode::Kind::For: {
      LoopNode loop;
      loop.iv = n.iv;
      loop.lower = n.lower;
      loop.upper = n.upper;
      loop.origins = n.origins;
      int64_t trip = max_trip(loop, box);
      for (const auto &a : n.annotations)
        add_attr(loop, make_attr(a, trip, n.iv));
      IvRange lo = range_of(loop.lower, box, true), hi = range_of(loop.upper, box, false);
      box[n.iv] = {lo.lo, hi.hi};
      for (const auto &c : n.children) {
        auto sub = lower(c, box);
        for (auto &s : sub)
          loop.body.push_back(std::move(s));
      }
      box.erase(n.iv);
      out.push_back(Node{std::move(loop)});
      return out;
    }
    case AstNode::Kind::If: {
      IfNode in;
      in.conditions = n.conditions;
      for (const auto &c : n.children) {
        auto sub = lower(c, box);
        for (auto &s : sub)
          in.body.push_back(std::move(s));
      }
      out.push_back(Node{std::move(in)});
      return out;
    }
    case AstNode::Kind::User: {
      const PolyStmt &ps = stmts_[n.stmt];
      StmtNode s;
      s.name = ps.name;
      s.compute_index = ps.compute_index;
      s.op = ps.body.op;
      s.dims = ps.domain.dims;
      s.steps = ps.steps;
      for (const auto &[d, e] : n.subst) {
        if (!e.is_plain_var())
          fail("user node of '" + ps.name + "' maps '" + d + "' to a non-loop expression");
        s.dim_to_iv[d] = e.coeffs().begin()->first;
      }
      for (const auto &[it, e] : ps.orig_subst)
        s.iter_map[it] = e.substitute(n.subst);
      s.dest.array = ps.body.dest.array;
      for (const auto &e : ps.body.dest.indices)
        s.dest.indices.push_back(e.substitute(s.iter_map));
      s.rhs = substitute(ps.body.rhs, s.iter_map);
      out.push_back(Node{std::move(s)});
      return out;
    }
    }
    return out;
  }

private:
  const std::vector<PolyStmt> &stmts_;
};

// Depth-first search for loops iterating (stmt, dim); tracks iv ranges.
void find_loops(std::vector<Node> &nodes, const std::string &stmt, const std::string &dim,
                IvBox &box, std::vector<std::pair<LoopNode *, int64_t>> &out) {
  for (auto &n : nodes) {
    if (auto *l = std::get_if<LoopNode>(&n.value)) {
      if (l->iterates(stmt, dim))
        out.push_back({l, max_trip(*l, box)});
      IvRange lo = range_of(l->lower, box, true), hi = range_of(l->upper, box, false);
      box[l->iv] = {lo.lo, hi.hi};
      find_loops(l->body, stmt, dim, box, out);
      box.erase(l->iv);
    } else if (auto *i = std::get_if<IfNode>(&n.value)) {
      find_loops(i->body, stmt, dim, box, out);
    }
  }
}

void print_nodes(std::ostringstream &os, const std::vector<Node> &nodes, int indent);

std::string attrs_str(const std::vector<PragmaAttr> &attrs) {
  std::string out;
  for (const auto &a : attrs) {
    if (a.kind == PragmaAttr::Kind::Pipeline)
      out += " @pipeline(II=" + std::to_string(a.value) + ")";
    else if (a.full)
      out += " @unroll(full)";
    else
      out += " @unroll(factor=" + std::to_string(a.value) + ")";
  }
  return out;
}

void print_nodes(std::ostringstream &os, const std::vector<Node> &nodes, int indent) {
  std::string pad(indent * 2, ' ');
  for (const auto &n : nodes) {
    if (auto *l = std::get_if<LoopNode>(&n.value)) {
      os << pad << "for " << l->iv << " = " << l->lower.str(true) << " to "
         << l->upper.str(false) << attrs_str(l->attrs) << " {\n";
      print_nodes(os, l->body, indent + 1);
      os << pad << "}\n";
    } else if (auto *i = std::get_if<IfNode>(&n.value)) {
      os << pad << "if (";
      for (size_t k = 0; k < i->conditions.size(); ++k)
        os << (k ? " and " : "") << i->conditions[k].str();
      os << ") {\n";
      print_nodes(os, i->body, indent + 1);
      os << pad << "}\n";
    } else {
      const auto &s = std::get<StmtNode>(n.value);
      os << pad << s.name << ": " << s.dest.array;
      for (const auto &e : s.dest.indices)
        os << "[" << e.str() << "]";
      os << (s.op == StmtOp::Accumulate ? " += " : " = ") << to_string(*s.rhs) << ";\n";
    }
  }
}

void visit_stmts(const std::vector<Node> &nodes, std::vector<const LoopNode *> &stack,
                 const std::function<void(const StmtNode &,
                                          const std::vector<const LoopNode *> &)> &fn) {
  for (const auto &n : nodes) {
    if (auto *l = std::get_if<LoopNode>(&n.value)) {
      stack.push_back(l);
      visit_stmts(l->body, stack, fn);
      stack.pop_back();
    } else if (auto *i = std::get_if<IfNode>(&n.value)) {
      visit_stmts(i->body, stack, fn);
    } else {
      fn(std::get<StmtNode>(n.value), stack);
    }
  }
}

} // namespace

const PragmaAttr *LoopNode::find(PragmaAttr::Kind kind) const {
  for (const auto &a : attrs)
    if (a.kind == kind)
      return &a;
  return nullptr;
}

bool LoopNode::iterates(const std::string &stmt, const std::string &dim) const {
  for (const auto &[s, d] : origins)
    if (s == stmt && d == dim)
      return true;
  return false;
}

int64_t ArrayDecl::factor_for(int dim) const {
  for (const auto &p : partitions)
    if (p.dim == dim)
      return p.type == PartitionType::Complete ? array.shape[dim - 1] : p.factor;
  return 1;
}

ArrayDecl *LoopIR::find_array(const std::string &n) {
  for (auto &a : arrays)
    if (a.array.name == n)
      return &a;
  return nullptr;
}

const ArrayDecl *LoopIR::find_array(const std::string &n) const {
  for (const auto &a : arrays)
    if (a.array.name == n)
      return &a;
  return nullptr;
}

IvRange loop_range(const LoopNode &loop, const IvBox &outer) {
  IvRange lo = range_of(loop.lower, outer, true), hi = range_of(loop.upper, outer, false);
  return {lo.lo, hi.hi};
}

LoopIR lower_ast(const AstNode &ast, const std::vector<PolyStmt> &stmts, const Function &f) {
  LoopIR ir;
  ir.name = f.name;
  for (const auto &p : f.placeholders)
    ir.arrays.push_back({p, {}});
  IvBox box;
  ir.roots = Lowerer(stmts).lower(ast, box);
  return ir;
}

LoopIR attach_hw(LoopIR ir, const ScheduleDirective &d) {
  if (auto *p = std::get_if<PartitionDirective>(&d.value)) {
    ArrayDecl *a = ir.find_array(p->array);
    if (!a)
      fail("unknown array '" + p->array + "'");
    if (static_cast<int>(p->factors.size()) > a->array.rank())
      fail("partition factor list longer than rank of '" + p->array + "'");
    for (size_t k = 0; k < p->factors.size(); ++k) {
      int64_t factor = p->factors[k];
      if (factor < 1)
        fail("partition factors must be positive");
      if (factor == 1)
        continue;
      if (p->type != PartitionType::Complete && factor > a->array.shape[k])
        fail("partition factor exceeds extent of '" + p->array + "'");
      PartitionAttr attr{p->type, p->type == PartitionType::Complete ? 0 : factor,
                         static_cast<int>(k) + 1};
      bool exists = false;
      for (const auto &e : a->partitions)
        if (e.dim == attr.dim) {
          if (!(e == attr))
            fail("conflicting partitions on dimension " + std::to_string(attr.dim) + " of '" +
                 p->array + "'");
          exists = true;
        }
      if (!exists)
        a->partitions.push_back(attr);
    }
    std::sort(a->partitions.begin(), a->partitions.end(),
              [](const PartitionAttr &x, const PartitionAttr &y) { return x.dim < y.dim; });
    return ir;
  }
  std::string stmt, dim;
  HwAnnotation ann;
  if (auto *p = std::get_if<PipelineDirective>(&d.value)) {
    stmt = p->compute;
    dim = p->dim;
    ann = {HwAnnotation::Kind::Pipeline, dim, p->ii};
  } else if (auto *u = std::get_if<UnrollDirective>(&d.value)) {
    stmt = u->compute;
    dim = u->dim;
    ann = {HwAnnotation::Kind::Unroll, dim, u->factor};
  } else {
    fail("directive '" + to_string(d) + "' is not a hardware optimization");
  }
  IvBox box;
  std::vector<std::pair<LoopNode *, int64_t>> loops;
  find_loops(ir.roots, stmt, dim, box, loops);
  if (loops.empty())
    fail("unknown loop '" + dim + "' in compute '" + stmt + "'");
  for (auto &[loop, trip] : loops)
    add_attr(*loop, make_attr(ann, trip, loop->iv));
  return ir;
}

LoopIR lower_statements(const Function &f, const std::vector<PolyStmt> &stmts,
                        const std::vector<PartitionDirective> &partitions,
                        std::vector<Diagnostic> *warnings) {
  LoopIR ir = lower_ast(build_ast(stmts, warnings), stmts, f);
  for (const auto &p : partitions)
    ir = attach_hw(std::move(ir), ScheduleDirective{p, 0, 0});
  return ir;
}

std::string print_loopir(const LoopIR &ir) {
  std::ostringstream os;
  os << "func " << ir.name << " {\n";
  for (const auto &a : ir.arrays) {
    os << "  array " << a.array.name << ": " << a.array.dtype.str();
    for (int64_t e : a.array.shape)
      os << "[" << e << "]";
    os << " " << to_string(a.array.direction);
    for (const auto &p : a.partitions) {
      os << " @array_partition(" << to_string(p.type);
      if (p.type != PartitionType::Complete)
        os << ", factor=" << p.factor;
      os << ", dim=" << p.dim << ")";
    }
    os << "\n";
  }
  print_nodes(os, ir.roots, 1);
  os << "}\n";
  return os.str();
}

void for_each_stmt(const LoopIR &ir,
                   const std::function<void(const StmtNode &,
                                            const std::vector<const LoopNode *> &)> &fn) {
  std::vector<const LoopNode *> stack;
  visit_stmts(ir.roots, stack, fn);
}

} // namespace loomweaver
