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

#include "loomweaver/driver.h"

namespace loomweaver {

std::vector<PolyStmt> schedule_statements(const Function &f,
                                          std::vector<PartitionDirective> *partitions) {
  std::vector<PolyStmt> stmts;
  for (size_t i = 0; i < f.computes.size(); ++i)
    stmts.push_back(lift(f.computes[i], static_cast<int>(i)));
  for (const auto &d : f.directives) {
    try {
      if (d.is_loop_transform())
        apply_directive(stmts, d);
      else if (auto *p = std::get_if<PartitionDirective>(&d.value)) {
        if (partitions)
          partitions->push_back(*p);
      } else {
        annotate(stmts, d);
      }
    } catch (const CompileError &e) {
      throw CompileError(error_at(d.line, d.column, e.what()));
    }
  }
  return stmts;
}

Compilation compile(const Function &f, const CompileOptions &opts) {
  Compilation out;
  std::vector<Diagnostic> errors;
  for (auto &d : validate(f))
    (d.severity == Severity::Error ? errors : out.warnings).push_back(d);
  if (!errors.empty())
    throw CompileError(errors);

  out.deps = build_dep_graph(f);
  collect_paths(out.deps); // rejects cycles early
  out.warnings.insert(out.warnings.end(), out.deps.warnings.begin(), out.deps.warnings.end());

  if (opts.dse || f.has_auto_dse()) {
    DseResult r = auto_dse(f, opts.dse_config);
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
    out.stmts = r.stmts;
    out.ast = build_ast(out.stmts);
    out.ir = r.ir;
    out.estimate = r.estimate;
    out.dse = std::move(r);
    return out;
  }

  out.stmts = schedule_statements(f);
  out.ast = build_ast(out.stmts, &out.warnings);
  out.ir = lower_ast(out.ast, out.stmts, f);
  for (const auto &d : f.directives)
    if (std::holds_alternative<PartitionDirective>(d.value)) {
      try {
        out.ir = attach_hw(std::move(out.ir), d);
      } catch (const CompileError &e) {
        throw CompileError(error_at(d.line, d.column, e.what()));
      }
    }
  out.estimate = estimate_function(out.ir, f, out.deps, opts.dse_config.model);
  return out;
}

} // namespace loomweaver
