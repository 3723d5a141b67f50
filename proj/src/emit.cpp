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
#include <cmath>
#include <sstream>

#include "loomweaver/emit.h"

namespace loomweaver {
namespace {

const char *kMacros = "#define floord(n, d) (((n) < 0) ? -((-(n) + (d) - 1) / (d)) : (n) / (d))\n"
                      "#define ceild(n, d) (((n) < 0) ? -(-(n) / (d)) : ((n) + (d) - 1) / (d))\n";

std::string affine_c(const AffineExpr &e) {
  std::string s = e.str();
  return e.is_constant() || e.is_plain_var() ? s : "(" + s + ")";
}

std::string bound_c(const BoundExpr &b, bool is_lower) {
  if (b.kind == BoundExpr::Kind::Term) {
    if (b.term.den == 1)
      return affine_c(b.term.num);
    return std::string(is_lower ? "ceild(" : "floord(") + b.term.num.str() + ", " +
           std::to_string(b.term.den) + ")";
  }
  if (b.args.empty())
    throw CompileError("unsupported loop bound: empty " +
                       std::string(b.kind == BoundExpr::Kind::Max ? "max" : "min"));
  std::string acc = bound_c(b.args[0], is_lower);
  const char *cmp = b.kind == BoundExpr::Kind::Max ? " > " : " < ";
  for (size_t k = 1; k < b.args.size(); ++k) {
    std::string next = bound_c(b.args[k], is_lower);
    acc = "(" + acc + cmp + next + " ? " + acc + " : " + next + ")";
  }
  return acc;
}

std::string access_c(const std::string &array, const std::vector<AffineExpr> &idx) {
  std::string out = array;
  for (const auto &e : idx)
    out += "[" + e.str() + "]";
  return out;
}

std::string ctx_cast(const DataType &ctx) { return ctx.is_float() ? ctx.c_type() : "int64_t"; }

std::string int_literal(int64_t v) {
  if (v == INT64_MIN)
    return "INT64_MIN";
  return "INT64_C(" + std::to_string(v) + ")";
}

class ExprWriter {
public:
  ExprWriter(const Function &f, const DataType &ctx) : f_(f), ctx_(ctx) {}

  std::string write(const Expr &e) const {
    switch (e.kind) {
    case Expr::Kind::Constant:
      if (ctx_.is_float())
        return c_float_literal(e.is_float_literal ? e.float_value
                                                  : static_cast<double>(e.int_value),
                               ctx_);
      if (e.is_float_literal)
        return int_literal(static_cast<int64_t>(std::trunc(e.float_value)));
      return int_literal(e.int_value);
    case Expr::Kind::Index:
      return "(" + ctx_cast(ctx_) + ")" + affine_c(e.index);
    case Expr::Kind::Load: {
      const Placeholder *p = f_.find_array(e.array);
      std::string a = access_c(e.array, e.indices);
      if (p && p->dtype == ctx_)
        return a;
      return "(" + ctx_cast(ctx_) + ")" + a;
    }
    case Expr::Kind::Negate:
      return "(-" + write(*e.lhs) + ")";
    case Expr::Kind::Binary: {
      const char *op = " + ";
      switch (e.op) {
      case Expr::BinOp::Add: op = " + "; break;
      case Expr::BinOp::Sub: op = " - "; break;
      case Expr::BinOp::Mul: op = " * "; break;
      case Expr::BinOp::Div: op = " / "; break;
      }
      return "(" + write(*e.lhs) + op + write(*e.rhs) + ")";
    }
    }
    return "0";
  }

private:
  const Function &f_;
  DataType ctx_;
};

std::string dims_c(const Placeholder &p) {
  std::string out;
  for (int64_t e : p.shape)
    out += "[" + std::to_string(e) + "]";
  return out;
}

class Writer {
public:
  Writer(const Function &f) : f_(f) {}

  void nodes(std::ostringstream &os, const std::vector<Node> &ns, int indent) const {
    for (const auto &n : ns)
      node(os, n, indent);
  }

private:
  static std::string pad(int indent) { return std::string(2 * indent, ' '); }

  void node(std::ostringstream &os, const Node &n, int indent) const {
    if (auto *l = std::get_if<LoopNode>(&n.value)) {
      os << pad(indent) << "for (int " << l->iv << " = " << bound_c(l->lower, true) << "; "
         << l->iv << " < " << bound_c(l->upper, false) << " + 1; " << l->iv << "++) {\n";
      for (const auto &a : l->attrs) {
        if (a.kind == PragmaAttr::Kind::Pipeline)
          os << pad(indent + 1) << "#pragma HLS pipeline II=" << a.value << "\n";
        else if (a.full)
          os << pad(indent + 1) << "#pragma HLS unroll\n";
        else
          os << pad(indent + 1) << "#pragma HLS unroll factor=" << a.value << "\n";
      }
      nodes(os, l->body, indent + 1);
      os << pad(indent) << "}\n";
    } else if (auto *c = std::get_if<IfNode>(&n.value)) {
      std::string cond;
      for (const auto &k : c->conditions)
        cond += (cond.empty() ? "" : " && ") + std::string("(") + k.expr.str() +
                (k.is_equality ? " == 0" : " >= 0") + ")";
      os << pad(indent) << "if (" << (cond.empty() ? "1" : cond) << ") {\n";
      nodes(os, c->body, indent + 1);
      os << pad(indent) << "}\n";
    } else {
      const auto &s = std::get<StmtNode>(n.value);
      const Placeholder *p = f_.find_array(s.dest.array);
      ExprWriter w(f_, p->dtype);
      os << pad(indent) << access_c(s.dest.array, s.dest.indices)
         << (s.op == StmtOp::Accumulate ? " += " : " = ") << w.write(*s.rhs) << ";\n";
    }
  }

  const Function &f_;
};

void partition_pragmas(std::ostringstream &os, const ArrayDecl &a) {
  for (const auto &p : a.partitions) {
    os << "  #pragma HLS array_partition variable=" << a.array.name << " "
       << to_string(p.type);
    if (p.type != PartitionType::Complete)
      os << " factor=" << p.factor;
    os << " dim=" << p.dim << "\n";
  }
}

nlohmann::json resources_json(const Resources &r) {
  return {{"dsp", r.dsp}, {"lut", r.lut}, {"ff", r.ff}, {"bram", r.bram}};
}

nlohmann::json nest_json(const NestEstimate &n) {
  nlohmann::json pipes = nlohmann::json::array();
  for (const auto &p : n.pipelines)
    pipes.push_back({{"iv", p.iv},
                     {"targetII", p.target_ii},
                     {"recurrenceII", p.recurrence_ii},
                     {"achievedII", p.achieved_ii},
                     {"iterations", p.iterations},
                     {"depth", p.depth}});
  return {{"computes", n.computes},
          {"latency", n.latency},
          {"resources", resources_json(n.resources)},
          {"ii", n.ii},
          {"tiles", n.tiles},
          {"parallelism", n.parallel.value()},
          {"parallelismExact", n.parallel.str()},
          {"pipelines", pipes}};
}

} // namespace

std::string c_float_literal(double value, const DataType &t) {
  if (std::isnan(value))
    return t.bits == 32 ? "(0.0f / 0.0f)" : "(0.0 / 0.0)";
  if (std::isinf(value)) {
    std::string one = t.bits == 32 ? "1.0f" : "1.0";
    return std::string("(") + (value < 0 ? "-" : "") + one + " / 0.0" +
           (t.bits == 32 ? "f" : "") + ")";
  }
  char buf[64];
  std::to_chars_result res;
  if (t.bits == 32)
    res = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(value));
  else
    res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos)
    s += ".0";
  else if (s.find('.') == std::string::npos) {
    auto e = s.find('e');
    s.insert(e, ".0");
  }
  if (t.bits == 32)
    s += "f";
  return s[0] == '-' ? "(" + s + ")" : s;
}

std::string emit_hls_c(const LoopIR &ir, const Function &f) {
  std::ostringstream body;
  for (const auto &a : ir.arrays)
    if (a.array.direction == ArrayDirection::Temp)
      body << "  " << a.array.dtype.c_type() << " " << a.array.name << dims_c(a.array)
           << " = {0};\n";
  for (const auto &a : ir.arrays)
    partition_pragmas(body, a);
  Writer(f).nodes(body, ir.roots, 1);
  std::string text = body.str();

  std::ostringstream os;
  os << "#include <stdint.h>\n\n";
  if (text.find("floord(") != std::string::npos || text.find("ceild(") != std::string::npos)
    os << kMacros << "\n";
  os << "void " << ir.name << "(";
  bool first = true;
  for (const auto &a : ir.arrays) {
    if (a.array.direction == ArrayDirection::Temp)
      continue;
    os << (first ? "" : ", ") << a.array.dtype.c_type() << " " << a.array.name
       << dims_c(a.array);
    first = false;
  }
  if (first)
    os << "void";
  os << ") {\n" << text << "}\n";
  return os.str();
}

nlohmann::json diagnostics_json(const std::vector<Diagnostic> &diags) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto &d : diags)
    out.push_back({{"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"message", d.message},
                   {"line", d.line},
                   {"column", d.column}});
  return out;
}

nlohmann::json deps_json(const DepGraph &g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t n = 0; n < g.nodes.size(); ++n) {
    nlohmann::json deps = nlohmann::json::array();
    for (const auto &d : g.attrs[n].self_deps) {
      nlohmann::json dir = nlohmann::json::array();
      for (char c : d.direction.entries)
        dir.push_back(std::string(1, c));
      nlohmann::json dist = nullptr;
      if (d.distance.known)
        dist = d.distance.entries;
      deps.push_back({{"array", d.array},
                      {"distance", dist},
                      {"direction", dir},
                      {"reduction", d.reduction}});
    }
    nodes.push_back({{"name", g.nodes[n]},
                     {"depth", g.depths[n]},
                     {"reductionDims", g.attrs[n].reduction_dims},
                     {"selfDeps", deps}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto &e : g.edges)
    edges.push_back({{"from", g.nodes[e.producer]}, {"to", g.nodes[e.consumer]}, {"array", e.array}});
  nlohmann::json paths = nlohmann::json::array();
  for (const auto &p : collect_paths(g)) {
    nlohmann::json names = nlohmann::json::array();
    for (int n : p)
      names.push_back(g.nodes[n]);
    paths.push_back(names);
  }
  return {{"nodes", nodes}, {"edges", edges}, {"paths", paths}};
}

nlohmann::json estimate_json(const Estimate &e) {
  nlohmann::json out = {{"latency", e.latency}, {"resources", resources_json(e.resources)}};
  const NestEstimate *worst = nullptr;
  for (const auto &n : e.nests)
    if (!worst || n.latency > worst->latency)
      worst = &n;
  if (worst) {
    out["parallelism"] = worst->parallel.value();
    out["parallelismExact"] = worst->parallel.str();
    out["tiles"] = worst->tiles;
    out["ii"] = worst->ii;
  } else {
    out["parallelism"] = nullptr;
    out["parallelismExact"] = nullptr;
    out["tiles"] = nlohmann::json::array();
    out["ii"] = nullptr;
  }
  nlohmann::json nests = nlohmann::json::array();
  for (const auto &n : e.nests)
    nests.push_back(nest_json(n));
  out["nests"] = nests;
  out["pathLatencies"] = e.path_latency;
  return out;
}

nlohmann::json emit_report(const ReportParts &parts) {
  nlohmann::json out;
  out["function"] = parts.function ? nlohmann::json(parts.function->name) : nlohmann::json();
  out["diagnostics"] = diagnostics_json(parts.diagnostics);
  const DepGraph *deps = parts.deps;
  if (!deps && parts.compilation)
    deps = &parts.compilation->deps;
  out["deps"] = deps ? deps_json(*deps) : nlohmann::json();
  out["stage1Trace"] = nullptr;
  out["steps"] = nullptr;
  out["final"] = nullptr;
  if (const Compilation *c = parts.compilation) {
    if (c->dse) {
      nlohmann::json trace = nlohmann::json::array();
      for (const auto &s : c->dse->trace)
        trace.push_back(s.str());
      out["stage1Trace"] = trace;
      nlohmann::json steps = nlohmann::json::array();
      for (const auto &s : c->dse->steps)
        steps.push_back({{"node", s.node},
                         {"directives", s.directives},
                         {"nodeLatency", s.node_latency},
                         {"previousLatency", s.previous_latency},
                         {"estimate", estimate_json(s.estimate)},
                         {"accepted", s.accepted}});
      out["steps"] = steps;
    }
    out["final"] = estimate_json(c->estimate);
  }
  out["seed"] = parts.seed ? nlohmann::json(*parts.seed) : nlohmann::json();
  out["check"] = parts.check ? nlohmann::json(*parts.check) : nlohmann::json();
  return out;
}

} // namespace loomweaver
