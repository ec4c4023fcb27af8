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

#ifndef DHSP_ORACLE_H
#define DHSP_ORACLE_H

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/group.h"

namespace dhsp {

/// Opaque value of a hiding function. Encodings are injective across kinds
/// (single token, ordered pair, unordered pair, vector token, fresh value).
class OracleValue {
  public:
    OracleValue() = default;

    static OracleValue token(const BigInt &r);
    static OracleValue token(const std::vector<BigInt> &coords);
    static OracleValue ordered_pair(const OracleValue &u, const OracleValue &w);
    static OracleValue unordered_pair(const OracleValue &u, const OracleValue &w);
    /// A value no other call site produces.
    static OracleValue fresh(uint64_t id);

    bool operator==(const OracleValue &) const = default;
    auto operator<=>(const OracleValue &o) const { return compare(o) <=> 0; }
    std::string str() const;

  private:
    int compare(const OracleValue &o) const;
    std::vector<BigInt> parts_;
};

class ReflectionFunction;

namespace detail {
struct SecretAccess;
struct OracleBuilder;
}  // namespace detail

/// A function on D_A (A = Z/N_1 + ... + Z/N_a) constant on the right cosets of a
/// hidden subgroup. The slope is sealed: only measurement sampling reads it.
class HidingOracle {
  public:
    using Evaluator = std::function<OracleValue(const GenDihedralElement &)>;

    const std::vector<BigInt> &orders() const { return orders_; }
    /// N for the cyclic case; throws unless the oracle has one coordinate.
    const BigInt &modulus() const;

    OracleValue evaluate(const GenDihedralElement &g);
    OracleValue evaluate(const DihedralElement &g);

    uint64_t queries() const { return *queries_; }
    double corruption_rate() const;
    const BigInt &corruption_numerator() const { return corrupt_num_; }
    const BigInt &corruption_denominator() const { return corrupt_den_; }

    /// Public description; never contains the slope.
    std::string to_json() const;

    /// Views share this oracle's query counter.
    /// D_{A'} with coordinate `coord` replaced by Z/(N/r), embedded onto
    /// <x^r e_coord, y x^{residue e_coord}, other x's>.
    HidingOracle restrict_radix(size_t coord, unsigned long r, const BigInt &residue) const;
    HidingOracle restrict_index2(size_t coord, bool parity) const {
        return restrict_radix(coord, 2, BigInt(parity ? 1 : 0));
    }
    /// Precomposition with x^{e_coord} -> x^{unit e_coord}.
    HidingOracle automorphism_view(size_t coord, const BigInt &unit) const;
    /// Oracle on the quotient D_d of D_N by <x^d> (cyclic case, d | N); only
    /// meaningful when <x^d> lies in the hidden subgroup.
    HidingOracle quotient_view(const BigInt &d) const;

  private:
    friend struct detail::SecretAccess;
    friend struct detail::OracleBuilder;

    HidingOracle() = default;

    std::vector<BigInt> orders_;
    Evaluator eval_;
    std::vector<BigInt> secret_;
    bool reflection_ = true;
    BigInt corrupt_num_ = 0;
    BigInt corrupt_den_ = 1;
    std::string kind_;
    std::shared_ptr<uint64_t> queries_ = std::make_shared<uint64_t>(0);
};

HidingOracle make_reflection_oracle(const GroupCtx &ctx, const BigInt &s);
/// Injective f: the hidden subgroup is trivial.
HidingOracle make_injective_oracle(const GroupCtx &ctx);
/// Hides <x^d> or <x^d, y x^s> in D_N, d | N.
HidingOracle make_subgroup_oracle(const GroupCtx &ctx, const BigInt &d, std::optional<BigInt> slope);

/// Signals the (Z/2)^k branch of the hidden reflection to hidden shift
/// reduction, which needs Simon's algorithm instead.
class SimonCaseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Injective f, g on A with f(a) = g(a + s). Finite coordinates take residues,
/// free coordinates take arbitrary integers.
class ShiftPair {
  public:
    using Function = std::function<OracleValue(const std::vector<BigInt> &)>;

    ShiftPair(AbelianGroupSpec spec, Function f, Function g, std::vector<BigInt> shift);

    const AbelianGroupSpec &spec() const { return spec_; }
    OracleValue f(const std::vector<BigInt> &a) const { return f_(a); }
    OracleValue g(const std::vector<BigInt> &a) const { return g_(a); }

  private:
    friend HidingOracle shift_to_dihedral(const ShiftPair &p);
    friend ReflectionFunction shift_to_reflection_in_A(const ShiftPair &p);

    AbelianGroupSpec spec_;
    Function f_, g_;
    std::vector<BigInt> shift_;
};

/// Standard instance: f(a) = token(a), g(a) = f(a - s).
ShiftPair make_shift_pair(const AbelianGroupSpec &spec, const std::vector<BigInt> &shift);

/// h on a finite A, injective except h(a) = h(s - a).
class ReflectionFunction {
  public:
    using Function = std::function<OracleValue(const std::vector<BigInt> &)>;

    ReflectionFunction(std::vector<BigInt> orders, Function h, std::vector<BigInt> s);

    const std::vector<BigInt> &orders() const { return orders_; }
    OracleValue operator()(const std::vector<BigInt> &a) const { return h_(a); }

  private:
    friend ShiftPair reflection_to_shift(const ReflectionFunction &h, std::optional<std::vector<BigInt>> v);

    std::vector<BigInt> orders_;
    Function h_;
    std::vector<BigInt> s_;
};

/// h(a) = token(min(a, s - a)) componentwise-canonicalized.
ReflectionFunction make_reflection_function(const std::vector<BigInt> &orders, const std::vector<BigInt> &s);

/// h(x^a) = f(a), h(y x^a) = g(a); hides <y x^s>. Free coordinates are
/// truncated, which corrupts a |s_j| / 2^m fraction of cosets.
HidingOracle shift_to_dihedral(const ShiftPair &p);

/// f(a) = (h(-a), h(v - a)), g(a) = (h(a), h(a - v)); needs 2v != 0. When v is
/// omitted a coordinate with N_j > 2 is used. Throws SimonCaseError if no such
/// v exists.
ShiftPair reflection_to_shift(const ReflectionFunction &h, std::optional<std::vector<BigInt>> v = std::nullopt);

/// h(a) = {f(-a), g(a)}; h(a) = h(s - a). Finite A only.
ReflectionFunction shift_to_reflection_in_A(const ShiftPair &p);

/// N -> M hidden substring instance: f(x) = g(x + s), 0 <= x < N, 0 <= s < M - N.
class SubstringInstance {
  public:
    using Function = std::function<OracleValue(const BigInt &)>;

    SubstringInstance(BigInt n, BigInt m, Function f, Function g, BigInt s);

    const BigInt &n() const { return n_; }
    const BigInt &m() const { return m_; }
    OracleValue f(const BigInt &x) const { return f_(x); }
    OracleValue g(const BigInt &x) const { return g_(x); }

  private:
    friend HidingOracle splice_substring(const SubstringInstance &inst, const BigInt &t);

    BigInt n_, m_;
    Function f_, g_;
    BigInt s_;
};

/// g(x) = token(x) on {0..M-1}, f(x) = g(x + s).
SubstringInstance make_substring_instance(const BigInt &n, const BigInt &m, const BigInt &s);

/// Identifies dom f with Z/N and splices g'(n) = g(n + t). The result hides slope
/// s - t mod N with |s - t| broken cosets. Requires M = 2N and 0 <= t < M - N.
HidingOracle splice_substring(const SubstringInstance &inst, const BigInt &t);

}  // namespace dhsp

#endif  // DHSP_ORACLE_H
