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

#include "dhsp/oracle.h"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace dhsp {

namespace {

enum Kind : unsigned long { kToken = 0, kVector = 1, kOrdered = 2, kUnordered = 3, kFresh = 4 };

std::vector<BigInt> reduce(const std::vector<BigInt> &a, const std::vector<BigInt> &orders) {
    std::vector<BigInt> out(a.size());
    for (size_t j = 0; j < a.size(); ++j) out[j] = j < orders.size() ? mod(a[j], orders[j]) : a[j];
    return out;
}

}  // namespace

OracleValue OracleValue::token(const BigInt &r) {
    OracleValue v;
    v.parts_ = {BigInt(kToken), r};
    return v;
}

OracleValue OracleValue::token(const std::vector<BigInt> &coords) {
    OracleValue v;
    v.parts_.reserve(coords.size() + 1);
    v.parts_.push_back(BigInt(kVector));
    v.parts_.insert(v.parts_.end(), coords.begin(), coords.end());
    return v;
}

OracleValue OracleValue::ordered_pair(const OracleValue &u, const OracleValue &w) {
    OracleValue v;
    v.parts_.push_back(BigInt(kOrdered));
    v.parts_.push_back(BigInt(static_cast<unsigned long>(u.parts_.size())));
    v.parts_.insert(v.parts_.end(), u.parts_.begin(), u.parts_.end());
    v.parts_.insert(v.parts_.end(), w.parts_.begin(), w.parts_.end());
    return v;
}

OracleValue OracleValue::unordered_pair(const OracleValue &u, const OracleValue &w) {
    OracleValue v = u.compare(w) <= 0 ? ordered_pair(u, w) : ordered_pair(w, u);
    v.parts_[0] = kUnordered;
    return v;
}

OracleValue OracleValue::fresh(uint64_t id) {
    OracleValue v;
    v.parts_ = {BigInt(kFresh), BigInt(static_cast<unsigned long>(id))};
    return v;
}

int OracleValue::compare(const OracleValue &o) const {
    if (parts_.size() != o.parts_.size()) return parts_.size() < o.parts_.size() ? -1 : 1;
    for (size_t i = 0; i < parts_.size(); ++i) {
        int c = cmp(parts_[i], o.parts_[i]);
        if (c != 0) return c < 0 ? -1 : 1;
    }
    return 0;
}

std::string OracleValue::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < parts_.size(); ++i) os << (i ? ":" : "") << parts_[i].get_str(16);
    return os.str();
}

namespace detail {

struct OracleBuilder {
    static HidingOracle build(std::vector<BigInt> orders, HidingOracle::Evaluator eval, std::vector<BigInt> secret,
                              bool reflection, BigInt corrupt_num, BigInt corrupt_den, std::string kind) {
        HidingOracle o;
        o.orders_ = std::move(orders);
        o.eval_ = std::move(eval);
        o.secret_ = std::move(secret);
        o.reflection_ = reflection;
        o.corrupt_num_ = std::move(corrupt_num);
        o.corrupt_den_ = std::move(corrupt_den);
        o.kind_ = std::move(kind);
        return o;
    }

    static HidingOracle view(const HidingOracle &parent, std::vector<BigInt> orders, HidingOracle::Evaluator eval,
                             std::vector<BigInt> secret, bool reflection, std::string kind) {
        HidingOracle o = build(std::move(orders), std::move(eval), std::move(secret), reflection,
                               parent.corrupt_num_, parent.corrupt_den_, std::move(kind));
        o.queries_ = parent.queries_;
        return o;
    }
};

}  // namespace detail

using detail::OracleBuilder;

const BigInt &HidingOracle::modulus() const {
    if (orders_.size() != 1) throw std::logic_error("HidingOracle::modulus: oracle is not over a cyclic group");
    return orders_[0];
}

OracleValue HidingOracle::evaluate(const GenDihedralElement &g) {
    if (g.v.size() != orders_.size()) throw std::invalid_argument("HidingOracle::evaluate: rank mismatch");
    ++*queries_;
    return eval_(GenDihedralElement{g.t, reduce(g.v, orders_)});
}

OracleValue HidingOracle::evaluate(const DihedralElement &g) {
    return evaluate(GenDihedralElement{g.t, {g.b}});
}

double HidingOracle::corruption_rate() const {
    mpq_class q(corrupt_num_, corrupt_den_);
    return q.get_d();
}

std::string HidingOracle::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_;
    std::vector<std::string> orders;
    for (const auto &n : orders_) orders.push_back(n.get_str());
    j["orders"] = orders;
    j["queries"] = *queries_;
    j["corruption_rate"] = {{"numerator", corrupt_num_.get_str()}, {"denominator", corrupt_den_.get_str()}};
    return j.dump();
}

HidingOracle HidingOracle::restrict_radix(size_t coord, unsigned long r, const BigInt &residue) const {
    if (coord >= orders_.size()) throw std::out_of_range("restrict_radix: coordinate");
    const BigInt n = orders_[coord];
    if (r < 2 || !mpz_divisible_ui_p(n.get_mpz_t(), r)) {
        throw std::invalid_argument("restrict_radix: radix must divide N (N=" + n.get_str() + ")");
    }
    std::vector<BigInt> orders = orders_;
    orders[coord] = n / r;
    const BigInt rho = mod(residue, BigInt(r));
    Evaluator parent = eval_;
    auto eval = [parent, coord, r, rho, n](const GenDihedralElement &g) {
        GenDihedralElement lifted = g;
        BigInt b = g.v[coord] * r;
        if (g.t) b += rho;
        lifted.v[coord] = mod(b, n);
        return parent(lifted);
    };
    std::vector<BigInt> secret = secret_;
    bool reflection = reflection_;
    if (reflection && mod(secret_[coord], BigInt(r)) == rho) {
        secret[coord] = (secret_[coord] - rho) / r;
    } else {
        reflection = false;
        secret[coord] = 0;
    }
    return OracleBuilder::view(*this, std::move(orders), std::move(eval), std::move(secret), reflection,
                               kind_ + "/restricted");
}

HidingOracle HidingOracle::automorphism_view(size_t coord, const BigInt &unit) const {
    if (coord >= orders_.size()) throw std::out_of_range("automorphism_view: coordinate");
    const BigInt n = orders_[coord];
    const BigInt c = mod(unit, n);
    const BigInt c_inv = inverse_mod(c, n);
    Evaluator parent = eval_;
    auto eval = [parent, coord, c, n](const GenDihedralElement &g) {
        GenDihedralElement image = g;
        image.v[coord] = mod(g.v[coord] * c, n);
        return parent(image);
    };
    std::vector<BigInt> secret = secret_;
    secret[coord] = mod(secret_[coord] * c_inv, n);
    return OracleBuilder::view(*this, orders_, std::move(eval), std::move(secret), reflection_,
                               kind_ + "/automorphism");
}

HidingOracle HidingOracle::quotient_view(const BigInt &d) const {
    const BigInt &n = modulus();
    if (d < 1 || mod(n, d) != 0) throw std::invalid_argument("quotient_view: d must divide N");
    Evaluator parent = eval_;
    auto eval = [parent](const GenDihedralElement &g) { return parent(g); };
    return OracleBuilder::view(*this, {d}, std::move(eval), {mod(secret_[0], d)}, reflection_,
                               kind_ + "/quotient");
}

HidingOracle make_reflection_oracle(const GroupCtx &ctx, const BigInt &s) {
    if (s < 0 || s >= ctx.N) throw std::invalid_argument("make_reflection_oracle: slope out of range");
    BigInt n = ctx.N;
    auto eval = [n, s](const GenDihedralElement &g) {
        return OracleValue::token(g.t ? mod(g.v[0] - s, n) : g.v[0]);
    };
    return OracleBuilder::build({ctx.N}, std::move(eval), {s}, true, 0, 1, "reflection");
}

HidingOracle make_injective_oracle(const GroupCtx &ctx) {
    auto eval = [](const GenDihedralElement &g) { return OracleValue::token({BigInt(g.t ? 1 : 0), g.v[0]}); };
    return OracleBuilder::build({ctx.N}, std::move(eval), {BigInt(0)}, false, 0, 1, "injective");
}

HidingOracle make_subgroup_oracle(const GroupCtx &ctx, const BigInt &d, std::optional<BigInt> slope) {
    if (d < 1 || mod(ctx.N, d) != 0) throw std::invalid_argument("make_subgroup_oracle: d must divide N");
    HidingOracle::Evaluator eval;
    if (slope) {
        BigInt s = mod(*slope, ctx.N);
        eval = [d, s](const GenDihedralElement &g) {
            return OracleValue::token(mod(g.t ? BigInt(g.v[0] - s) : g.v[0], d));
        };
    } else {
        eval = [d](const GenDihedralElement &g) {
            return OracleValue::token({BigInt(g.t ? 1 : 0), mod(g.v[0], d)});
        };
    }
    return OracleBuilder::build({ctx.N}, std::move(eval), {slope ? mod(*slope, ctx.N) : BigInt(0)},
                                slope.has_value(), 0, 1, d == ctx.N ? "reflection" : "subgroup");
}

ShiftPair::ShiftPair(AbelianGroupSpec spec, Function f, Function g, std::vector<BigInt> shift)
    : spec_(std::move(spec)), f_(std::move(f)), g_(std::move(g)), shift_(std::move(shift)) {
    spec_.validate();
    if (shift_.size() != spec_.rank()) throw std::invalid_argument("ShiftPair: shift rank mismatch");
}

ShiftPair make_shift_pair(const AbelianGroupSpec &spec, const std::vector<BigInt> &shift) {
    std::vector<BigInt> finite = spec.orders;
    auto f = [finite](const std::vector<BigInt> &a) { return OracleValue::token(reduce(a, finite)); };
    auto g = [finite, shift](const std::vector<BigInt> &a) {
        std::vector<BigInt> b(a.size());
        for (size_t j = 0; j < a.size(); ++j) b[j] = a[j] - shift[j];
        return OracleValue::token(reduce(b, finite));
    };
    std::vector<BigInt> s = reduce(shift, finite);
    return ShiftPair(spec, f, g, s);
}

ReflectionFunction::ReflectionFunction(std::vector<BigInt> orders, Function h, std::vector<BigInt> s)
    : orders_(std::move(orders)), h_(std::move(h)), s_(std::move(s)) {
    if (s_.size() != orders_.size()) throw std::invalid_argument("ReflectionFunction: rank mismatch");
}

ReflectionFunction make_reflection_function(const std::vector<BigInt> &orders, const std::vector<BigInt> &s) {
    std::vector<BigInt> sr = reduce(s, orders);
    auto h = [orders, sr](const std::vector<BigInt> &a) {
        std::vector<BigInt> x = reduce(a, orders), y(a.size());
        for (size_t j = 0; j < a.size(); ++j) y[j] = mod(sr[j] - x[j], orders[j]);
        return OracleValue::token(std::min(x, y));
    };
    return ReflectionFunction(orders, h, sr);
}

HidingOracle shift_to_dihedral(const ShiftPair &p) {
    std::vector<BigInt> orders = p.spec_.truncated_orders();
    auto f = p.f_;
    auto g = p.g_;
    auto eval = [f, g](const GenDihedralElement &e) { return e.t ? g(e.v) : f(e.v); };
    std::vector<BigInt> secret(orders.size());
    BigInt den = 1, kept = 1;
    const size_t finite = p.spec_.orders.size();
    for (size_t j = 0; j < orders.size(); ++j) {
        secret[j] = mod(p.shift_[j], orders[j]);
        if (j >= finite) {
            BigInt mag = abs(p.shift_[j]);
            den *= orders[j];
            kept *= mag >= orders[j] ? BigInt(0) : BigInt(orders[j] - mag);
        }
    }
    return OracleBuilder::build(std::move(orders), std::move(eval), std::move(secret), true, den - kept, den,
                                "shift");
}

ShiftPair reflection_to_shift(const ReflectionFunction &h, std::optional<std::vector<BigInt>> v) {
    const auto &orders = h.orders_;
    if (!v) {
        for (size_t j = 0; j < orders.size() && !v; ++j) {
            if (orders[j] > 2) {
                std::vector<BigInt> e(orders.size(), BigInt(0));
                e[j] = 1;
                v = e;
            }
        }
        if (!v) throw SimonCaseError("reflection_to_shift: every v satisfies 2v = 0; use Simon's algorithm");
    }
    bool nonzero = false;
    for (size_t j = 0; j < orders.size(); ++j) nonzero = nonzero || mod(2 * (*v)[j], orders[j]) != 0;
    if (!nonzero) throw std::invalid_argument("reflection_to_shift: supplied v has 2v = 0");
    const std::vector<BigInt> vv = *v;
    auto hf = h.h_;
    auto sub = [orders](const std::vector<BigInt> &a, const std::vector<BigInt> &b) {
        std::vector<BigInt> out(a.size());
        for (size_t j = 0; j < a.size(); ++j) out[j] = mod(a[j] - b[j], orders[j]);
        return out;
    };
    const std::vector<BigInt> zero(orders.size(), BigInt(0));
    auto f = [hf, vv, zero, sub](const std::vector<BigInt> &a) {
        return OracleValue::ordered_pair(hf(sub(zero, a)), hf(sub(vv, a)));
    };
    auto g = [hf, vv, sub](const std::vector<BigInt> &a) {
        return OracleValue::ordered_pair(hf(a), hf(sub(a, vv)));
    };
    return ShiftPair(AbelianGroupSpec{orders, {}}, f, g, h.s_);
}

ReflectionFunction shift_to_reflection_in_A(const ShiftPair &p) {
    if (!p.spec_.free_bits.empty()) throw std::invalid_argument("shift_to_reflection_in_A: finite A only");
    const auto orders = p.spec_.orders;
    auto f = p.f_;
    auto g = p.g_;
    auto h = [orders, f, g](const std::vector<BigInt> &a) {
        std::vector<BigInt> neg(a.size());
        for (size_t j = 0; j < a.size(); ++j) neg[j] = mod(-a[j], orders[j]);
        return OracleValue::unordered_pair(f(neg), g(reduce(a, orders)));
    };
    return ReflectionFunction(orders, h, p.shift_);
}

SubstringInstance::SubstringInstance(BigInt n, BigInt m, Function f, Function g, BigInt s)
    : n_(std::move(n)), m_(std::move(m)), f_(std::move(f)), g_(std::move(g)), s_(std::move(s)) {
    if (n_ < 1 || m_ <= n_) throw std::invalid_argument("SubstringInstance: need 1 <= N < M");
    if (s_ < 0 || s_ >= m_ - n_) throw std::invalid_argument("SubstringInstance: need 0 <= s < M - N");
}

SubstringInstance make_substring_instance(const BigInt &n, const BigInt &m, const BigInt &s) {
    auto g = [](const BigInt &x) { return OracleValue::token(x); };
    auto f = [s](const BigInt &x) { return OracleValue::token(BigInt(x + s)); };
    return SubstringInstance(n, m, f, g, s);
}

HidingOracle splice_substring(const SubstringInstance &inst, const BigInt &t) {
    const BigInt &n = inst.n_;
    if (inst.m_ != 2 * n) throw std::invalid_argument("splice_substring: requires M = 2N");
    if (t < 0 || t >= inst.m_ - n) throw std::invalid_argument("splice_substring: requires 0 <= t < M - N");
    auto f = inst.f_;
    auto g = inst.g_;
    auto eval = [f, g, t](const GenDihedralElement &e) { return e.t ? g(e.v[0] + t) : f(e.v[0]); };
    BigInt diff = abs(BigInt(inst.s_ - t));
    return OracleBuilder::build({n}, std::move(eval), {mod(inst.s_ - t, n)}, true, diff, n, "spliced");
}

}  // namespace dhsp
