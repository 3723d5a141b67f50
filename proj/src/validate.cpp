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
#include <map>
#include <set>

#include "loomweaver/frontend.h"

namespace loomweaver {
namespace {

bool is_iterator_use_valid(const AffineExpr &e, const Compute &c) {
  for (const auto &[name, coeff] : e.coeffs())
    if (!c.find_iter(name))
      return false;
  return true;
}

class Validator {
public:
  explicit Validator(const Function &f) : f_(f) {}

  std::vector<Diagnostic> run() {
    check_declarations();
    for (const auto &c : f_.computes) {
      auto &dims = dims_[c.name];
      for (const auto &it : c.iters)
        dims.push_back(it.name);
    }
    for (const auto &d : f_.directives) {
      at_ = &d;
      std::visit([this](const auto &v) { check(v); }, d.value);
    }
    return std::move(diags_);
  }

private:
  void report(std::string msg) {
    int line = at_ ? at_->line : 0;
    int col = at_ ? at_->column : 0;
    diags_.push_back(error_at(line, col, std::move(msg)));
  }

  void check_declarations() {
    std::set<std::string> names;
    auto unique = [&](const std::string &n) {
      if (!names.insert(n).second)
        report("duplicate name '" + n + "'");
    };
    for (const auto &it : f_.iters) {
      unique(it.name);
      if (it.lower >= it.upper)
        report("iterator '" + it.name + "' has empty range");
    }
    for (const auto &p : f_.placeholders) {
      unique(p.name);
      if (p.shape.empty())
        report("array '" + p.name + "' has no dimensions");
      for (int64_t e : p.shape)
        if (e < 1)
          report("array '" + p.name + "' has non-positive extent");
      bool width_ok = p.dtype.is_float() ? (p.dtype.bits == 32 || p.dtype.bits == 64)
                                         : (p.dtype.bits == 8 || p.dtype.bits == 16 ||
                                            p.dtype.bits == 32 || p.dtype.bits == 64);
      if (!width_ok)
        report("array '" + p.name + "' has unsupported type width");
    }
    for (const auto &c : f_.computes) {
      unique(c.name);
      if (c.iters.empty())
        report("compute '" + c.name + "' has no iterators");
      std::set<std::string> seen;
      for (const auto &it : c.iters) {
        if (!seen.insert(it.name).second)
          report("compute '" + c.name + "' lists iterator '" + it.name + "' twice");
        if (it.lower >= it.upper)
          report("iterator '" + it.name + "' has empty range");
      }
      check_access(c, c.dest.array, c.dest.indices);
      if (!c.rhs) {
        report("compute '" + c.name + "' has no right-hand side");
        continue;
      }
      check_expr(c, *c.rhs);
    }
  }

  void check_access(const Compute &c, const std::string &array,
                    const std::vector<AffineExpr> &idx) {
    const Placeholder *p = f_.find_array(array);
    if (!p) {
      report("compute '" + c.name + "' references unknown array '" + array + "'");
      return;
    }
    if (static_cast<int>(idx.size()) != p->rank())
      report("rank mismatch on '" + array + "' in compute '" + c.name + "'");
    for (const auto &e : idx)
      if (!is_iterator_use_valid(e, c))
        report("compute '" + c.name + "' indexes '" + array +
               "' with an iterator outside its iteration list");
  }

  void check_expr(const Compute &c, const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::Constant:
      return;
    case Expr::Kind::Index:
      if (!is_iterator_use_valid(e.index, c))
        report("compute '" + c.name + "' uses an iterator outside its iteration list");
      return;
    case Expr::Kind::Load:
      check_access(c, e.array, e.indices);
      return;
    case Expr::Kind::Negate:
      check_expr(c, *e.lhs);
      return;
    case Expr::Kind::Binary:
      check_expr(c, *e.lhs);
      check_expr(c, *e.rhs);
      return;
    }
  }

  // Returns the live dim list for `compute`, or null after reporting.
  std::vector<std::string> *compute_dims(const std::string &compute) {
    auto it = dims_.find(compute);
    if (it == dims_.end()) {
      report("unknown compute '" + compute + "'");
      return nullptr;
    }
    return &it->second;
  }

  int position(const std::vector<std::string> &dims, const std::string &compute,
               const std::string &dim) {
    auto it = std::find(dims.begin(), dims.end(), dim);
    if (it == dims.end()) {
      report("unknown loop '" + dim + "' in compute '" + compute + "'");
      return -1;
    }
    return static_cast<int>(it - dims.begin());
  }

  bool fresh(const std::vector<std::string> &dims, const std::string &name,
             const std::string &compute) {
    if (std::find(dims.begin(), dims.end(), name) != dims.end()) {
      report("loop name '" + name + "' already exists in compute '" + compute + "'");
      return false;
    }
    return true;
  }

  // A transformation removed `dim`; hardware directives already placed on
  // it would dangle.
  void retire(const std::string &compute, const std::string &dim) {
    if (annotated_.count({compute, dim}))
      report("directive on loop '" + dim + "' of '" + compute +
             "' is invalidated by a later transformation");
  }

  void check(const InterchangeDirective &d) {
    auto *dims = compute_dims(d.compute);
    if (!dims)
      return;
    int a = position(*dims, d.compute, d.dim_a);
    int b = position(*dims, d.compute, d.dim_b);
    if (a >= 0 && b >= 0)
      std::swap((*dims)[a], (*dims)[b]);
  }

  void check(const SplitDirective &d) {
    auto *dims = compute_dims(d.compute);
    if (!dims)
      return;
    int p = position(*dims, d.compute, d.dim);
    if (d.factor < 2)
      report("split factor must be at least 2");
    if (d.outer == d.inner) {
      report("split names must differ");
      return;
    }
    if (p < 0 || !fresh(*dims, d.outer, d.compute) || !fresh(*dims, d.inner, d.compute))
      return;
    retire(d.compute, d.dim);
    (*dims)[p] = d.inner;
    dims->insert(dims->begin() + p, d.outer);
  }

  void check(const TileDirective &d) {
    auto *dims = compute_dims(d.compute);
    if (!dims)
      return;
    int pi = position(*dims, d.compute, d.dim_i);
    int pj = position(*dims, d.compute, d.dim_j);
    if (d.factor_i < 1 || d.factor_j < 1)
      report("tile factors must be positive");
    if (pi < 0 || pj < 0)
      return;
    if (pi == pj) {
      report("tile needs two distinct loops");
      return;
    }
    std::set<std::string> names{d.outer_i, d.outer_j, d.inner_i, d.inner_j};
    if (names.size() != 4) {
      report("tile names must be distinct");
      return;
    }
    for (const auto &n : names)
      if (n != d.dim_i && n != d.dim_j && !fresh(*dims, n, d.compute))
        return;
    retire(d.compute, d.dim_i);
    retire(d.compute, d.dim_j);
    int at = std::min(pi, pj);
    std::vector<std::string> rest;
    for (const auto &n : *dims)
      if (n != d.dim_i && n != d.dim_j)
        rest.push_back(n);
    rest.insert(rest.begin() + at, {d.outer_i, d.outer_j, d.inner_i, d.inner_j});
    *dims = rest;
  }

  void check(const SkewDirective &d) {
    auto *dims = compute_dims(d.compute);
    if (!dims)
      return;
    int pi = position(*dims, d.compute, d.dim_i);
    int pj = position(*dims, d.compute, d.dim_j);
    if (d.factor_j != 1)
      report("unsupported skew: second factor must be 1");
    if (pi < 0 || pj < 0)
      return;
    if (pi >= pj) {
      report("skew requires '" + d.dim_i + "' outside '" + d.dim_j + "'");
      return;
    }
    if (d.new_i == d.new_j) {
      report("skew names must differ");
      return;
    }
    for (const auto &n : {d.new_i, d.new_j})
      if (n != d.dim_i && n != d.dim_j && !fresh(*dims, n, d.compute))
        return;
    if (d.new_i != d.dim_i)
      retire(d.compute, d.dim_i);
    retire(d.compute, d.dim_j);
    (*dims)[pi] = d.new_i;
    (*dims)[pj] = d.new_j;
  }

  void check(const AfterDirective &d) {
    auto *mine = compute_dims(d.compute);
    auto *other = compute_dims(d.other);
    if (!mine || !other)
      return;
    if (d.compute == d.other) {
      report("compute '" + d.compute + "' cannot be ordered after itself");
      return;
    }
    if (d.level.empty())
      return;
    int p = position(*other, d.other, d.level);
    if (p < 0)
      return;
    if (static_cast<int>(mine->size()) <= p) {
      report("compute '" + d.compute + "' has no loop at level '" + d.level + "'");
      return;
    }
    for (int k = 0; k <= p; ++k)
      if ((*mine)[k] != (*other)[k]) {
        report("'" + d.compute + "' and '" + d.other + "' do not share loops up to '" +
               d.level + "'");
        return;
      }
  }

  void check(const PipelineDirective &d) {
    auto *dims = compute_dims(d.compute);
    if (!dims)
      return;
    if (position(*dims, d.compute, d.dim) >= 0)
      annotated_.insert({d.compute, d.dim});
    if (d.ii < 1)
      report("pipeline II must be at least 1");
  }

  void check(const UnrollDirective &d) {
    auto *dims = compute_dims(d.compute);
    if (!dims)
      return;
    if (position(*dims, d.compute, d.dim) >= 0)
      annotated_.insert({d.compute, d.dim});
    if (d.factor < 1)
      report("unroll factor must be at least 1");
  }

  void check(const PartitionDirective &d) {
    const Placeholder *p = f_.find_array(d.array);
    if (!p) {
      report("unknown array '" + d.array + "'");
      return;
    }
    if (d.factors.empty())
      report("partition factor list is empty");
    if (static_cast<int>(d.factors.size()) > p->rank())
      report("partition factor list longer than rank of '" + d.array + "'");
    for (size_t i = 0; i < d.factors.size(); ++i) {
      if (d.factors[i] < 1)
        report("partition factors must be positive");
      else if (i < p->shape.size() && d.factors[i] > p->shape[i] &&
               d.type != PartitionType::Complete)
        report("partition factor exceeds extent of dimension " + std::to_string(i + 1) +
               " of '" + d.array + "'");
    }
  }

  void check(const AutoDseDirective &d) {
    if (d.function != f_.name)
      report("auto_dse names unknown function '" + d.function + "'");
  }

  const Function &f_;
  const ScheduleDirective *at_ = nullptr;
  std::map<std::string, std::vector<std::string>> dims_;
  std::set<std::pair<std::string, std::string>> annotated_;
  std::vector<Diagnostic> diags_;
};

} // namespace

std::vector<Diagnostic> validate(const Function &f) { return Validator(f).run(); }

} // namespace loomweaver
