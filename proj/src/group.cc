// Copyright 2026 The dhsp-sieve Authors
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

#include "dhsp/group.h"

#include <cmath>
#include <stdexcept>

namespace dhsp {

GroupCtx::GroupCtx(BigInt n) : N(std::move(n)) {
    if (N < 1) throw std::invalid_argument("GroupCtx: N must be >= 1");
}

DihedralElement dmul(const DihedralElement &a, const DihedralElement &c, const GroupCtx &ctx) {
    // x^b y = y x^{-b}, so y^ta x^ba y^tc x^bc = y^{ta+tc} x^{(-1)^tc ba + bc}.
    BigInt b = c.t ? BigInt(c.b - a.b) : BigInt(a.b + c.b);
    return {a.t != c.t, mod(b, ctx.N)};
}

DihedralElement dinv(const DihedralElement &a, const GroupCtx &ctx) {
    if (a.t) return a;
    return {false, mod(-a.b, ctx.N)};
}

DihedralElement subgroup_embed(bool parity, const DihedralElement &e, const GroupCtx &ctx) {
    return subgroup_embed(BigInt(parity ? 1 : 0), 2, e, ctx);
}

DihedralElement subgroup_embed(const BigInt &residue, unsigned long r, const DihedralElement &e,
                               const GroupCtx &ctx) {
    if (r == 0 || !mpz_divisible_ui_p(ctx.N.get_mpz_t(), r)) {
        throw std::invalid_argument("subgroup_embed: radix must divide N (N=" + ctx.N.get_str() + ")");
    }
    BigInt b = e.b * r;
    if (e.t) b += residue;
    return {e.t, mod(b, ctx.N)};
}

unsigned truncation_bits(unsigned output_bits) {
    return output_bits + static_cast<unsigned>(std::ceil(std::sqrt(static_cast<double>(output_bits))));
}

std::vector<BigInt> AbelianGroupSpec::truncated_orders() const {
    std::vector<BigInt> out = orders;
    for (unsigned bits : free_bits) {
        BigInt n = 1;
        n <<= truncation_bits(bits);
        out.push_back(n);
    }
    return out;
}

void AbelianGroupSpec::validate() const {
    for (const auto &n : orders)
        if (n < 1) throw std::invalid_argument("AbelianGroupSpec: orders must be >= 1");
    for (unsigned b : free_bits)
        if (b == 0) throw std::invalid_argument("AbelianGroupSpec: truncation bounds must be positive");
}

GenDihedralElement gmul(const GenDihedralElement &a, const GenDihedralElement &c,
                        const std::vector<BigInt> &orders) {
    GenDihedralElement out{a.t != c.t, {}};
    out.v.reserve(orders.size());
    for (size_t j = 0; j < orders.size(); ++j) {
        BigInt b = c.t ? BigInt(c.v[j] - a.v[j]) : BigInt(a.v[j] + c.v[j]);
        out.v.push_back(mod(b, orders[j]));
    }
    return out;
}

GenDihedralElement ginv(const GenDihedralElement &a, const std::vector<BigInt> &orders) {
    if (a.t) return a;
    GenDihedralElement out{false, {}};
    for (size_t j = 0; j < orders.size(); ++j) out.v.push_back(mod(-a.v[j], orders[j]));
    return out;
}

CrtSplit::CrtSplit(const BigInt &n) : n_(n) {
    if (n < 1) throw std::invalid_argument("crt_split: N must be >= 1");
    a_ = trailing_zeros(n, 0);
    mpz_fdiv_q_2exp(m_.get_mpz_t(), n.get_mpz_t(), a_);
    pow2_ = 1;
    pow2_ <<= a_;
    // e2 = M * (M^{-1} mod 2^a), em = 2^a * (2^{-a} mod M).
    e2_ = m_ * inverse_mod(mod(m_, pow2_), pow2_);
    em_ = pow2_ * inverse_mod(mod(pow2_, m_), m_);
    e2_ = mod(e2_, n_);
    em_ = mod(em_, n_);
    if (a_ == 0) e2_ = 0;
    if (m_ == 1) em_ = 0;
}

std::pair<BigInt, BigInt> CrtSplit::split(const BigInt &residue) const {
    return {mod(residue, pow2_), mod(residue, m_)};
}

BigInt CrtSplit::join(const BigInt &two_part, const BigInt &odd_part) const {
    return mod(two_part * e2_ + odd_part * em_, n_);
}

}  // namespace dhsp
