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

#ifndef DHSP_GROUP_H
#define DHSP_GROUP_H

#include <utility>
#include <vector>

#include "dhsp/bigint.h"

namespace dhsp {

/// The dihedral group D_N = <x, y | x^N = y^2 = yxyx = 1> of order 2N.
struct GroupCtx {
    BigInt N;

    explicit GroupCtx(BigInt n);
};

/// y^t x^b in normal form: reflection flag first, then rotation exponent.
struct DihedralElement {
    bool t = false;
    BigInt b = 0;

    bool operator==(const DihedralElement &) const = default;
};

inline DihedralElement rotation(BigInt b) { return {false, std::move(b)}; }
inline DihedralElement reflection(BigInt b) { return {true, std::move(b)}; }

DihedralElement dmul(const DihedralElement &a, const DihedralElement &c, const GroupCtx &ctx);
DihedralElement dinv(const DihedralElement &a, const GroupCtx &ctx);

/// Embeds D_{N/2} onto F_parity = <x^2, y x^parity> inside D_N.
/// Throws std::invalid_argument for odd N. `ctx` is the large group D_N.
DihedralElement subgroup_embed(bool parity, const DihedralElement &e, const GroupCtx &ctx);

/// Radix version: D_{N/r} onto <x^r, y x^residue>, r | N.
DihedralElement subgroup_embed(const BigInt &residue, unsigned long r, const DihedralElement &e,
                               const GroupCtx &ctx);

/// Z^b + Z/N_1 + ... + Z/N_a. Free summands carry an output bit budget and
/// are truncated to Z/2^m with m = bits + ceil(sqrt(bits)).
struct AbelianGroupSpec {
    std::vector<BigInt> orders;
    std::vector<unsigned> free_bits;

    /// Orders of the finite group after truncating free summands; free
    /// coordinates come after the finite ones.
    std::vector<BigInt> truncated_orders() const;
    size_t rank() const { return orders.size() + free_bits.size(); }
    void validate() const;
};

unsigned truncation_bits(unsigned output_bits);

/// y^t x^v in the generalized dihedral group D_A, v a coordinate vector.
struct GenDihedralElement {
    bool t = false;
    std::vector<BigInt> v;

    bool operator==(const GenDihedralElement &) const = default;
};

/// Product in D_A for finite A given by `orders`; conjugation negates every
/// coordinate.
GenDihedralElement gmul(const GenDihedralElement &a, const GenDihedralElement &c,
                        const std::vector<BigInt> &orders);
GenDihedralElement ginv(const GenDihedralElement &a, const std::vector<BigInt> &orders);

/// N = 2^a * M with M odd, with the CRT isomorphism Z/N <-> Z/2^a x Z/M.
class CrtSplit {
  public:
    explicit CrtSplit(const BigInt &n);

    unsigned two_power() const { return a_; }
    const BigInt &odd_part() const { return m_; }
    const BigInt &modulus() const { return n_; }

    std::pair<BigInt, BigInt> split(const BigInt &residue) const;
    BigInt join(const BigInt &two_part, const BigInt &odd_part) const;

  private:
    BigInt n_;
    unsigned a_ = 0;
    BigInt m_;
    BigInt pow2_;
    // Idempotents: e2 = 1 mod 2^a, 0 mod M; em = 0 mod 2^a, 1 mod M.
    BigInt e2_;
    BigInt em_;
};

}  // namespace dhsp

#endif  // DHSP_GROUP_H
