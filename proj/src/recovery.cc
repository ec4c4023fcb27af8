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

#include "dhsp/recovery.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "dhsp/sieve_greedy.h"

namespace dhsp {

namespace {

constexpr double kPi = std::numbers::pi;

std::unique_ptr<QubitSource> direct_factory(PhaseBackend &be) { return std::make_unique<DirectSource>(be); }

BigInt pow2(unsigned e) {
    BigInt x = 1;
    x <<= e;
    return x;
}

// Reference offset delta in [1, 64] making 2 pi 2^j delta / N closest to +-pi/2.
BigInt quadrature_offset(const BigInt &n, unsigned j) {
    BigInt ideal = n >> (j + 2);
    if (ideal >= 1) return ideal;
    BigInt best = 1;
    double score = -1;
    const BigInt step = mod(pow2(j), n);
    for (unsigned long d = 1; d <= 64 && BigInt(d) < n; ++d) {
        double s = std::fabs(std::sin(2.0 * kPi * fraction(mod(step * d, n), n)));
        if (s > score + 1e-12) {
            score = s;
            best = d;
        }
    }
    return best;
}

// Round c + theta N / (2 pi 2^j) to the nearest residue mod N.
BigInt shift_center(const BigInt &c, double theta, const BigInt &n, unsigned j) {
    mpf_class x(n, 192);
    x *= theta / (2.0 * kPi);
    x /= mpf_class(pow2(j), 192);
    x += mpf_class(c, 192);
    x += 0.5;
    mpf_class fl = floor(x);
    return mod(BigInt(fl), n);
}

}  // namespace

bool verify_slope(HidingOracle &o, const BigInt &s) {
    return o.evaluate(DihedralElement{false, BigInt(0)}) == o.evaluate(DihedralElement{true, mod(s, o.modulus())});
}

BigInt recover_coordinate(HidingOracle &o, size_t coord, Rng &rng, const RecoveryOptions &opts,
                          const SourceFactory &factory, RecoveryReport &report) {
    const BigInt n = o.orders().at(coord);
    if (n == 1) return 0;
    const unsigned a = trailing_zeros(n, static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2)));
    const BigInt odd = n >> a;

    if (odd == 1) {
        HidingOracle view = o;
        BigInt s = 0;
        for (unsigned i = 0; i < a; ++i) {
            LevelReport level;
            level.level = i;
            const uint64_t before = o.queries();
            std::optional<bool> bit;
            for (size_t attempt = 0; attempt < opts.level_retries && !bit; ++attempt) {
                ++level.attempts;
                PhaseBackend be(view, rng, opts.faults);
                auto src = factory(be);
                try {
                    ParityResult pr = run_staged_parity(*src, a - i, StagedOptions{opts.budget_scale});
                    bit = pr.parity;
                    level.stats = std::move(pr.stats);
                } catch (const SieveExhausted &) {
                }
            }
            level.queries = o.queries() - before;
            report.levels.push_back(std::move(level));
            if (!bit) throw SieveExhausted("recover_coordinate: parity sieve produced no output");
            if (*bit) s += pow2(i);
            view = view.restrict_radix(coord, 2, BigInt(*bit ? 1 : 0));
        }
        return s;
    }

    const size_t rank = o.orders().size();
    IntervalOptions iopts;
    iopts.budget_scale = opts.budget_scale;
    iopts.unit_copies = opts.observations;

    // Level 0: coarse estimate straight from psi_1.
    BigInt center;
    {
        LevelReport level;
        const uint64_t before = o.queries();
        std::optional<BigInt> est;
        for (size_t attempt = 0; attempt < opts.level_retries && !est; ++attempt) {
            ++level.attempts;
            PhaseBackend be(o, rng, opts.faults);
            auto src = factory(be);
            IntervalResult ir = run_general_interval(*src, iopts);
            est = ir.estimate;
            level.stats = std::move(ir.stats);
        }
        level.queries = o.queries() - before;
        report.levels.push_back(std::move(level));
        if (!est) throw SieveExhausted("recover_coordinate: interval sieve produced no output");
        center = *est;
    }

    const CrtSplit crt(n);
    const unsigned last = ceil_log2(n) + 1;
    for (unsigned j = 1; j <= last; ++j) {
        const unsigned e = std::min(a, j);
        const BigInt unit = crt.join(BigInt(1), inverse_mod(pow2(j - e), odd));
        const BigInt unit_inv = inverse_mod(unit, n);
        HidingOracle frame = o.automorphism_view(coord, unit);
        LevelReport level;
        level.level = j;
        const uint64_t before = o.queries();
        std::vector<PhaseQubit> units;
        for (size_t attempt = 0; attempt < opts.level_retries && units.size() < 2; ++attempt) {
            ++level.attempts;
            PhaseBackend be(frame, rng, opts.faults);
            auto src = factory(be);
            try {
                units = collect_power_of_two_labels(*src, e, opts.observations, level.stats, iopts);
            } catch (const SieveExhausted &) {
                units.clear();
                continue;
            }
            // Observations must be made on the backend that owns the qubits.
            const BigInt delta = quadrature_offset(n, j);
            double hits[2] = {0, 0}, totals[2] = {0, 0};
            for (size_t i = 0; i < units.size(); ++i) {
                const size_t which = i % 2;
                const BigInt t = which == 0 ? center : BigInt(center + delta);
                std::vector<BigInt> ref(rank, BigInt(0));
                ref[coord] = mod(t * unit_inv, n);
                totals[which] += 1;
                hits[which] += be.cosine_observe(units[i], ref) ? 1 : 0;
            }
            if (totals[1] == 0) {
                units.clear();
                continue;
            }
            const double c0 = 2.0 * hits[0] / totals[0] - 1.0;
            const double c1 = 2.0 * hits[1] / totals[1] - 1.0;
            const double phi = 2.0 * kPi * fraction(mod(pow2(j) * delta, n), n);
            const double sin_theta = (c1 - c0 * std::cos(phi)) / std::sin(phi);
            center = shift_center(center, std::atan2(sin_theta, c0), n, j);
        }
        level.queries = o.queries() - before;
        report.levels.push_back(std::move(level));
        if (units.size() < 2) throw SieveExhausted("recover_coordinate: no psi_{2^j} copies");
    }
    return center;
}

namespace {

// Shared retry loop: recover, then try the candidates around the estimate.
RecoveryReport recover_with_retries(HidingOracle &o, Rng &rng, const RecoveryOptions &opts, bool exact) {
    RecoveryReport report;
    const uint64_t before = o.queries();
    const BigInt &n = o.modulus();
    SlopeVerifier verify = opts.verifier ? opts.verifier : [&o](const BigInt &s) { return verify_slope(o, s); };
    for (size_t attempt = 0; attempt < opts.retry_cap; ++attempt) {
        ++report.attempts;
        BigInt c;
        try {
            c = recover_coordinate(o, 0, rng, opts, direct_factory, report);
        } catch (const SieveExhausted &) {
            continue;
        }
        std::vector<BigInt> candidates{c};
        if (!exact) {
            candidates.push_back(mod(c + 1, n));
            candidates.push_back(mod(c - 1, n));
        }
        for (const auto &cand : candidates) {
            if (verify(cand)) {
                report.secret = cand;
                report.verified = true;
                report.queries = o.queries() - before;
                return report;
            }
        }
    }
    throw NoHiddenReflection("no verified slope after " + std::to_string(opts.retry_cap) + " attempts");
}

}  // namespace

RecoveryReport recover_slope_power2(HidingOracle &o, unsigned n, Rng &rng, const RecoveryOptions &opts) {
    if (o.orders().size() != 1 || o.modulus() != pow2(n)) {
        throw std::invalid_argument("recover_slope_power2: N must equal 2^n");
    }
    return recover_with_retries(o, rng, opts, true);
}

RecoveryReport recover_slope_general(HidingOracle &o, Rng &rng, const RecoveryOptions &opts) {
    if (o.orders().size() != 1) throw std::invalid_argument("recover_slope_general: cyclic rotation group required");
    const BigInt &n = o.modulus();
    if (n < 2) throw std::invalid_argument("recover_slope_general: N must be >= 2");
    const unsigned a = trailing_zeros(n, static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2)));
    if ((n >> a) == 1) return recover_slope_power2(o, a, rng, opts);
    return recover_with_retries(o, rng, opts, false);
}

std::vector<BigInt> guess_grid(const BigInt &n, size_t count) {
    std::vector<BigInt> out;
    std::set<BigInt> seen;
    auto add = [&](const BigInt &t) {
        if (out.size() < count && t >= 0 && t < n && seen.insert(t).second) out.push_back(t);
    };
    add(BigInt(0));
    BigInt den = 2;
    while (out.size() < count && den <= 2 * n) {
        for (BigInt num = 1; num < den && out.size() < count; num += 2) add(BigInt(num * n / den));
        den *= 2;
    }
    return out;
}

SubstringReport solve_substring(const SubstringInstance &inst, Rng &rng, const SubstringOptions &opts) {
    const BigInt &n = inst.n();
    SubstringReport report;
    for (const BigInt &t : guess_grid(n, opts.max_guesses)) {
        report.guesses.push_back(t);
        HidingOracle spliced = splice_substring(inst, t);
        RecoveryOptions ropts = opts.recovery;
        ropts.verifier = [&](const BigInt &u) {
            const BigInt s = mod(t + u, n);
            for (size_t i = 0; i < opts.check_samples; ++i) {
                const BigInt x = uniform_below(n, rng);
                if (!(inst.f(x) == inst.g(x + s))) return false;
            }
            return true;
        };
        try {
            RecoveryReport r = recover_slope_general(spliced, rng, ropts);
            report.queries += spliced.queries();
            report.shift = mod(t + r.secret, n);
            return report;
        } catch (const NoHiddenReflection &) {
            report.queries += spliced.queries();
        }
    }
    throw NoHiddenReflection("solve_substring: guess budget exhausted");
}

AbelianReport solve_abelian_shift(const ShiftPair &p, Rng &rng, const AbelianOptions &opts) {
    HidingOracle o = shift_to_dihedral(p);
    return solve_abelian_shift(p, o, rng, opts);
}

AbelianReport solve_abelian_shift(const ShiftPair &p, HidingOracle &o, Rng &rng, const AbelianOptions &opts) {
    const AbelianGroupSpec &spec = p.spec();
    if (o.orders() != spec.truncated_orders()) throw std::invalid_argument("solve_abelian_shift: oracle/group mismatch");
    const std::vector<BigInt> orders = o.orders();
    const size_t rank = orders.size();
    const size_t finite = spec.orders.size();
    uint64_t batch = opts.batch_budget;
    if (batch == 0) {
        unsigned width = 0;
        for (const auto &n : orders) width += 1 + ceil_log2(n + 1);
        batch = rank == 1 ? 2 : std::clamp<uint64_t>(uint64_t{64} << (width / 4), 256, 1u << 16);
    }
    AbelianReport report;
    for (size_t attempt = 0; attempt < opts.recovery.retry_cap; ++attempt) {
        ++report.attempts;
        std::vector<BigInt> s(rank);
        bool ok = true;
        for (size_t c = 0; c < rank && ok; ++c) {
            SourceFactory factory = [c, batch](PhaseBackend &be) -> std::unique_ptr<QubitSource> {
                return std::make_unique<ProjectedSource>(be, c, batch);
            };
            RecoveryReport scratch;
            try {
                s[c] = recover_coordinate(o, c, rng, opts.recovery, factory, scratch);
            } catch (const SieveExhausted &) {
                ok = false;
            }
        }
        if (!ok) continue;
        for (size_t j = finite; j < rank; ++j) {
            if (2 * s[j] >= orders[j]) s[j] -= orders[j];
        }
        for (size_t i = 0; i < opts.check_samples && ok; ++i) {
            std::vector<BigInt> x(rank), y(rank);
            for (size_t j = 0; j < rank; ++j) {
                if (j < finite) {
                    x[j] = uniform_below(orders[j], rng);
                } else {
                    BigInt span = pow2(spec.free_bits[j - finite]);
                    x[j] = uniform_below(2 * span, rng) - span;
                }
                y[j] = x[j] + s[j];
            }
            ok = p.f(x) == p.g(y);
        }
        if (ok) {
            report.shift = std::move(s);
            report.queries = o.queries();
            return report;
        }
    }
    throw NoHiddenReflection("solve_abelian_shift: no verified shift");
}

std::vector<BigInt> divisors(const BigInt &n) {
    if (n < 1) throw std::invalid_argument("divisors: n must be positive");
    std::vector<std::pair<BigInt, unsigned>> factors;
    BigInt m = n;
    for (BigInt p = 2; p * p <= m; ++p) {
        unsigned e = 0;
        while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
            m /= p;
            ++e;
        }
        if (e > 0) factors.emplace_back(p, e);
    }
    if (m > 1) factors.emplace_back(m, 1);
    std::vector<BigInt> out{BigInt(1)};
    for (const auto &[p, e] : factors) {
        const size_t sz = out.size();
        BigInt pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= p;
            for (size_t i = 0; i < sz; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

HiddenSubgroup find_hidden_subgroup(HidingOracle &o, Rng &rng, const RecoveryOptions &opts) {
    if (o.orders().size() != 1) throw std::invalid_argument("find_hidden_subgroup: cyclic rotation group required");
    const BigInt &n = o.modulus();
    const OracleValue id = o.evaluate(DihedralElement{false, BigInt(0)});
    HiddenSubgroup h{n, std::nullopt};
    for (const BigInt &d : divisors(n)) {
        if (o.evaluate(DihedralElement{false, d}) == id) {
            h.d = d;
            break;
        }
    }
    HidingOracle q = o.quotient_view(h.d);
    if (h.d == 1) {
        if (q.evaluate(DihedralElement{true, BigInt(0)}) == id) h.slope = BigInt(0);
        return h;
    }
    try {
        h.slope = recover_slope_general(q, rng, opts).secret;
    } catch (const NoHiddenReflection &) {
    }
    return h;
}

}  // namespace dhsp
