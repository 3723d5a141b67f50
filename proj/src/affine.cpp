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

#include "loomweaver/affine.h"

#include <numeric>

#include "loomweaver/diagnostic.h"

namespace loomweaver {

int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}

int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}

int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

int64_t wrap_neg(int64_t a) {
  return static_cast<int64_t>(0 - static_cast<uint64_t>(a));
}

int64_t floor_div(int64_t num, int64_t den) {
  int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0)))
    --q;
  return q;
}

int64_t ceil_div(int64_t num, int64_t den) { return -floor_div(-num, den); }

int64_t floor_mod(int64_t num, int64_t den) { return num - floor_div(num, den) * den; }

AffineExpr AffineExpr::var(const std::string &name, int64_t coeff) {
  AffineExpr e;
  e.set_coeff(name, coeff);
  return e;
}

int64_t AffineExpr::coeff(const std::string &name) const {
  auto it = coeffs_.find(name);
  return it == coeffs_.end() ? 0 : it->second;
}

std::vector<std::string> AffineExpr::vars() const {
  std::vector<std::string> out;
  out.reserve(coeffs_.size());
  for (const auto &[name, c] : coeffs_)
    out.push_back(name);
  return out;
}

bool AffineExpr::is_plain_var() const {
  return constant_ == 0 && coeffs_.size() == 1 && coeffs_.begin()->second == 1;
}

void AffineExpr::set_coeff(const std::string &name, int64_t value) {
  if (value == 0)
    coeffs_.erase(name);
  else
    coeffs_[name] = value;
}

AffineExpr AffineExpr::operator+(const AffineExpr &o) const {
  AffineExpr r = *this;
  for (const auto &[name, c] : o.coeffs_)
    r.set_coeff(name, wrap_add(r.coeff(name), c));
  r.constant_ = wrap_add(constant_, o.constant_);
  return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr &o) const { return *this + (-o); }

AffineExpr AffineExpr::operator-() const { return *this * -1; }

AffineExpr AffineExpr::operator*(int64_t k) const {
  AffineExpr r;
  if (k == 0)
    return r;
  for (const auto &[name, c] : coeffs_)
    r.set_coeff(name, wrap_mul(c, k));
  r.constant_ = wrap_mul(constant_, k);
  return r;
}

AffineExpr AffineExpr::substitute(const std::string &name,
                                  const AffineExpr &value) const {
  int64_t c = coeff(name);
  if (c == 0)
    return *this;
  AffineExpr r = *this;
  r.coeffs_.erase(name);
  return r + value * c;
}

AffineExpr AffineExpr::substitute(const std::map<std::string, AffineExpr> &subst) const {
  AffineExpr r(constant_);
  for (const auto &[name, c] : coeffs_) {
    auto it = subst.find(name);
    if (it == subst.end())
      r += AffineExpr::var(name, c);
    else
      r += it->second * c;
  }
  return r;
}

AffineExpr AffineExpr::rename(const std::map<std::string, std::string> &names) const {
  AffineExpr r(constant_);
  for (const auto &[name, c] : coeffs_) {
    auto it = names.find(name);
    r += AffineExpr::var(it == names.end() ? name : it->second, c);
  }
  return r;
}

int64_t AffineExpr::evaluate(const std::map<std::string, int64_t> &values) const {
  return evaluate([&](const std::string &name) {
    auto it = values.find(name);
    if (it == values.end())
      throw CompileError("no value bound for dimension '" + name + "'");
    return it->second;
  });
}

int64_t AffineExpr::evaluate(
    const std::function<int64_t(const std::string &)> &lookup) const {
  int64_t acc = constant_;
  for (const auto &[name, c] : coeffs_)
    acc = wrap_add(acc, wrap_mul(c, lookup(name)));
  return acc;
}

int64_t AffineExpr::coeff_gcd() const {
  int64_t g = 0;
  for (const auto &[name, c] : coeffs_)
    g = std::gcd(g, c < 0 ? -c : c);
  return g;
}

std::string AffineExpr::str() const {
  std::string out;
  for (const auto &[name, c] : coeffs_) {
    int64_t mag = c < 0 ? -c : c;
    if (out.empty())
      out += c < 0 ? "-" : "";
    else
      out += c < 0 ? " - " : " + ";
    if (mag != 1)
      out += std::to_string(mag) + "*";
    out += name;
  }
  if (out.empty())
    return std::to_string(constant_);
  if (constant_ > 0)
    out += " + " + std::to_string(constant_);
  else if (constant_ < 0)
    out += " - " + std::to_string(-constant_);
  return out;
}

} // namespace loomweaver
