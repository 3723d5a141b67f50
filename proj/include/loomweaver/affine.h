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

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace loomweaver {

// Two's-complement wraparound arithmetic on 64-bit integers.
int64_t wrap_add(int64_t a, int64_t b);
int64_t wrap_sub(int64_t a, int64_t b);
int64_t wrap_mul(int64_t a, int64_t b);
int64_t wrap_neg(int64_t a);

// Division helpers rounding toward -inf / +inf. Divisor must be positive.
int64_t floor_div(int64_t num, int64_t den);
int64_t ceil_div(int64_t num, int64_t den);
int64_t floor_mod(int64_t num, int64_t den);

/// A linear combination of named dimensions plus a constant. Coefficients
/// are kept sparse: a name never maps to zero.
class AffineExpr {
public:
  AffineExpr() = default;
  explicit AffineExpr(int64_t constant) : constant_(constant) {}
  static AffineExpr var(const std::string &name, int64_t coeff = 1);

  const std::map<std::string, int64_t> &coeffs() const { return coeffs_; }
  int64_t constant() const { return constant_; }
  int64_t coeff(const std::string &name) const;
  bool is_constant() const { return coeffs_.empty(); }
  bool depends_on(const std::string &name) const { return coeff(name) != 0; }
  std::vector<std::string> vars() const;

  /// Single variable with coefficient one and zero constant.
  bool is_plain_var() const;

  void set_coeff(const std::string &name, int64_t value);
  void set_constant(int64_t value) { constant_ = value; }

  AffineExpr operator+(const AffineExpr &o) const;
  AffineExpr operator-(const AffineExpr &o) const;
  AffineExpr operator-() const;
  AffineExpr operator*(int64_t k) const;
  AffineExpr &operator+=(const AffineExpr &o) { return *this = *this + o; }

  /// Replace `name` by `value`.
  AffineExpr substitute(const std::string &name, const AffineExpr &value) const;
  AffineExpr substitute(const std::map<std::string, AffineExpr> &subst) const;
  AffineExpr rename(const std::map<std::string, std::string> &names) const;

  /// Throws CompileError if a variable is missing from `values`.
  int64_t evaluate(const std::map<std::string, int64_t> &values) const;
  int64_t evaluate(const std::function<int64_t(const std::string &)> &lookup) const;

  /// gcd of all variable coefficients (0 for a constant expression).
  int64_t coeff_gcd() const;

  std::string str() const;

  bool operator==(const AffineExpr &) const = default;
  auto operator<=>(const AffineExpr &) const = default;

private:
  std::map<std::string, int64_t> coeffs_;
  int64_t constant_ = 0;
};

} // namespace loomweaver
