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

#include "dhsp/sieve_staged.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace dhsp {

namespace {

constexpr size_t kMaxList = size_t{1} << 24;

unsigned ceil_sqrt(double x) {
    if (x <= 0) return 0;
    auto m = static_cast<unsigned>(std::floor(std::sqrt(x)));
    while (static_cast<double>(m) * m < x - 1e-12) ++m;
    return m;
}

double log2_big(const BigInt &n) {
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp);
}

std::vector<BigInt> coordinate_labels(const std::vector<PhaseQubit> &list, size_t coord) {
    std::vector<BigInt> out;
    out.reserve(list.size());
    for (const auto &q : list) out.push_back(q.label()[coord]);
    return out;
}

std::vector<PhaseQubit> draw_list(QubitSource &source, size_t count) {
    std::vector<PhaseQubit> list;
    list.reserve(count);
    for (size_t i = 0; i < count; ++i) list.push_back(source.draw());
    return list;
}

std::vector<BigInt> reference(size_t rank, size_t coord, const BigInt &t) {
    std::vector<BigInt> ref(rank, BigInt(0));
    ref[coord] = t;
    return ref;
}

}  // namespace

DirectSource::DirectSource(PhaseBackend &backend) : backend_(&backend) {
    if (backend.orders().size() != 1) throw std::invalid_argument("DirectSource: backend must have rank one");
}

std::vector<double> SieveStats::survival_ratios() const {
    std::vector<double> out;
    for (size_t j = 0; j + 1 < list_sizes.size(); ++j) {
        out.push_back(list_sizes[j] == 0 ? 0.0
                                         : static_cast<double>(list_sizes[j + 1]) / static_cast<double>(list_sizes[j]));
    }
    return out;
}

std::vector<double> list_size_schedule(unsigned m, size_t terms) {
    if (m < 1) throw std::invalid_argument("list_size_schedule: m must be >= 1");
    std::vector<double> c{3.0};
    for (size_t k = 1; k <= terms; ++k) {
        double kk = static_cast<double>(k);
        c.push_back(c.back() / (1.0 - std::exp2(-kk - m / 3.0)) + std::exp2(-2.0 * kk));
    }
    return c;
}

size_t initial_list_size(unsigned m) { return size_t{3} << (3 * m); }

StagedConfig staged_config(unsigned n) {
    StagedConfig cfg;
    cfg.m = std::max(1u, ceil_sqrt(static_cast<double>(n) - 1.0));
    cfg.C = list_size_schedule(cfg.m, cfg.m);
    cfg.initial_size = initial_list_size(cfg.m);
    return cfg;
}

unsigned interval_depth(const BigInt &n) {
    if (n < 1) throw std::invalid_argument("interval_depth: N must be >= 1");
    return std::max(1u, ceil_sqrt(log2_big(n) - 2.0));
}

Matching match_by_suffix(const std::vector<BigInt> &labels, unsigned lo, unsigned width) {
    if (width > 63) throw std::invalid_argument("match_by_suffix: window wider than 63 bits");
    std::vector<uint64_t> keys(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) keys[i] = bit_window(labels[i], lo, width);
    std::vector<size_t> order(labels.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return keys[a] < keys[b]; });
    Matching out;
    size_t i = 0;
    while (i < order.size()) {
        if (i + 1 < order.size() && keys[order[i]] == keys[order[i + 1]]) {
            out.pairs.emplace_back(order[i], order[i + 1]);
            i += 2;
        } else {
            out.leftovers.push_back(order[i]);
            ++i;
        }
    }
    return out;
}

std::vector<PhaseQubit> zero_low_bits(PhaseBackend &backend, std::vector<PhaseQubit> list, size_t coord,
                                      unsigned target_bits, unsigned window, SieveStats &stats) {
    if (target_bits == 0) return list;
    if (window == 0) throw std::invalid_argument("zero_low_bits: window must be positive");
    const BigInt &n = backend.orders()[coord];
    if (trailing_zeros(n, target_bits) < target_bits) {
        throw std::invalid_argument("zero_low_bits: 2^target must divide N");
    }
    if (stats.list_sizes.empty()) stats.list_sizes.push_back(list.size());
    for (unsigned lo = 0; lo < target_bits; lo += window) {
        const unsigned hi = std::min(lo + window, target_bits);
        Matching match = match_by_suffix(coordinate_labels(list, coord), lo, hi - lo);
        std::vector<PhaseQubit> next;
        next.reserve(match.pairs.size() / 2 + 1);
        for (auto [i, j] : match.pairs) {
            auto ext = backend.combine(list[i], list[j]);
            if (!ext.difference) continue;
            if (trailing_zeros(ext.qubit.label()[coord], hi) < hi) {
                throw std::logic_error("zero_low_bits: stage invariant violated");
            }
            next.push_back(std::move(ext.qubit));
        }
        stats.pair_counts.push_back(match.pairs.size());
        stats.leftovers.push_back(match.leftovers.size());
        stats.list_sizes.push_back(next.size());
        list = std::move(next);
    }
    return list;
}

std::vector<PhaseQubit> interval_rounds(PhaseBackend &backend, std::vector<PhaseQubit> list, size_t coord,
                                        unsigned shift, SieveStats &stats) {
    const BigInt &n = backend.orders()[coord];
    BigInt reduced;
    mpz_fdiv_q_2exp(reduced.get_mpz_t(), n.get_mpz_t(), shift);
    const unsigned m = interval_depth(reduced);
    auto value = [&](const PhaseQubit &q) {
        BigInt v;
        mpz_fdiv_q_2exp(v.get_mpz_t(), q.label()[coord].get_mpz_t(), shift);
        return v;
    };
    for (auto &q : list) {
        if (2 * value(q) > reduced) q = backend.negate_label(q);
    }
    if (stats.list_sizes.empty()) stats.list_sizes.push_back(list.size());
    for (unsigned j = 0; j < m; ++j) {
        const unsigned width_bits = m * m - m * (j + 1) + 1;
        std::vector<BigInt> values, keys;
        values.reserve(list.size());
        keys.reserve(list.size());
        for (const auto &q : list) {
            values.push_back(value(q));
            BigInt key;
            mpz_fdiv_q_2exp(key.get_mpz_t(), values.back().get_mpz_t(), width_bits);
            keys.push_back(std::move(key));
        }
        // Buckets keep input order; sorting by value would pair near-equal
        // labels and leave mostly zeros.
        std::vector<size_t> order(list.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return keys[a] < keys[b]; });
        std::vector<PhaseQubit> next;
        size_t pairs = 0, leftovers = 0;
        size_t i = 0;
        while (i < order.size()) {
            if (i + 1 < order.size() && keys[order[i]] == keys[order[i + 1]]) {
                ++pairs;
                size_t big = order[i], small = order[i + 1];
                if (values[big] < values[small]) std::swap(big, small);
                auto ext = backend.combine(list[big], list[small]);
                if (ext.difference) {
                    BigInt v = value(ext.qubit);
                    if (mpz_sizeinbase(v.get_mpz_t(), 2) > width_bits && v != 0) {
                        throw std::logic_error("interval_rounds: pair outside its bucket");
                    }
                    next.push_back(std::move(ext.qubit));
                }
                i += 2;
                continue;
            }
            ++leftovers;
            ++i;
        }
        stats.pair_counts.push_back(pairs);
        stats.leftovers.push_back(leftovers);
        stats.list_sizes.push_back(next.size());
        list = std::move(next);
    }
    return list;
}

ParityResult run_staged_parity(QubitSource &source, unsigned n, const StagedOptions &opts) {
    const BigInt &modulus = source.modulus();
    BigInt expect = 1;
    expect <<= n;
    if (n == 0 || modulus != expect) throw std::invalid_argument("run_staged_parity: N must equal 2^n, n >= 1");
    PhaseBackend &backend = source.backend();
    const uint64_t before = backend.oracle().queries();
    const StagedConfig cfg = staged_config(n);
    const auto size = static_cast<size_t>(std::ceil(static_cast<double>(cfg.initial_size) * opts.budget_scale));
    if (size > kMaxList) throw std::invalid_argument("run_staged_parity: list too large for this simulator");

    ParityResult res;
    std::vector<PhaseQubit> list = draw_list(source, size);
    list = zero_low_bits(backend, std::move(list), source.coordinate(), n - 1, cfg.m, res.stats);

    BigInt top = 1;
    top <<= (n - 1);
    std::vector<PhaseQubit *> finals;
    for (auto &q : list) {
        if (q.label()[source.coordinate()] == top) {
            finals.push_back(&q);
        } else {
            ++res.stats.final_zeros;
        }
    }
    res.stats.final_targets = finals.size();
    res.stats.queries = backend.oracle().queries() - before;
    if (finals.empty()) return res;
    size_t votes = std::min(opts.parity_votes, finals.size());
    if (votes % 2 == 0) --votes;
    size_t plus = 0;
    for (size_t i = 0; i < votes; ++i) plus += backend.measure_pm(*finals[i]) ? 1 : 0;
    res.parity = 2 * plus < votes;
    return res;
}

namespace {

BigInt estimate_from_units(PhaseBackend &backend, std::vector<PhaseQubit> &units, size_t coord, const BigInt &n) {
    const size_t rank = backend.orders().size();
    const BigInt t1 = n / 4;
    std::vector<std::pair<BigInt, bool>> obs;
    obs.reserve(units.size());
    for (size_t i = 0; i < units.size(); ++i) {
        const BigInt t = (i % 2 == 0) ? BigInt(0) : t1;
        obs.emplace_back(t, backend.cosine_observe(units[i], reference(rank, coord, t)));
    }
    if (n < 16) {
        // Direct maximum likelihood over every slope.
        const unsigned long nn = n.get_ui();
        double best = -1e300;
        unsigned long arg = 0;
        for (unsigned long c = 0; c < nn; ++c) {
            double ll = 0;
            for (const auto &[t, o] : obs) {
                double x = std::cos(std::numbers::pi * static_cast<double>((c + nn - t.get_ui() % nn) % nn) /
                                    static_cast<double>(nn));
                double p = x * x;
                ll += std::log(std::max(o ? p : 1.0 - p, 1e-6));
            }
            if (ll > best) {
                best = ll;
                arg = c;
            }
        }
        return BigInt(arg);
    }
    double hits[2] = {0, 0}, totals[2] = {0, 0};
    for (size_t i = 0; i < obs.size(); ++i) {
        totals[i % 2] += 1;
        hits[i % 2] += obs[i].second ? 1 : 0;
    }
    const double c0 = 2.0 * hits[0] / std::max(totals[0], 1.0) - 1.0;
    const double c1 = 2.0 * hits[1] / std::max(totals[1], 1.0) - 1.0;
    const double phi = 2.0 * std::numbers::pi * fraction(t1, n);
    const double sin_theta = (c1 - c0 * std::cos(phi)) / std::sin(phi);
    double theta = std::atan2(sin_theta, c0);
    if (theta < 0) theta += 2.0 * std::numbers::pi;
    // s = theta N / 2 pi, rounded; computed in extended precision for large N.
    mpf_class scaled(n, 128);
    scaled *= theta / (2.0 * std::numbers::pi);
    scaled += 0.5;
    mpf_class fl = floor(scaled);
    return mod(BigInt(fl), n);
}

}  // namespace

std::vector<PhaseQubit> collect_power_of_two_labels(QubitSource &source, unsigned shift, size_t copies,
                                                    SieveStats &stats, const IntervalOptions &opts) {
    const BigInt &n = source.modulus();
    if (shift > 0 && trailing_zeros(n, shift) < shift) {
        throw std::invalid_argument("collect_power_of_two_labels: 2^shift must divide N");
    }
    BigInt reduced;
    mpz_fdiv_q_2exp(reduced.get_mpz_t(), n.get_mpz_t(), shift);
    if (reduced < 2) throw std::invalid_argument("collect_power_of_two_labels: 2^shift must be a proper divisor of N");
    const unsigned m = interval_depth(reduced);
    const unsigned window = shift > 0 ? std::max(1u, ceil_sqrt(shift)) : 0;
    const unsigned stages = m + (shift > 0 ? (shift + window - 1) / window : 0);
    const double size_d = 3.0 * std::exp2(std::max(m, window) + 2.0 * stages) * opts.budget_scale;
    if (size_d > static_cast<double>(kMaxList)) {
        throw std::invalid_argument("collect_power_of_two_labels: list too large for this simulator");
    }
    const auto size = static_cast<size_t>(std::ceil(size_d));
    PhaseBackend &backend = source.backend();
    const size_t coord = source.coordinate();
    const uint64_t before = backend.oracle().queries();
    std::vector<PhaseQubit> units;
    for (size_t run = 0; run < opts.max_runs && units.size() < copies; ++run) {
        SieveStats run_stats;
        std::vector<PhaseQubit> list = draw_list(source, size);
        list = zero_low_bits(backend, std::move(list), coord, shift, std::max(window, 1u), run_stats);
        list = interval_rounds(backend, std::move(list), coord, shift, run_stats);
        for (auto &q : list) {
            BigInt v;
            mpz_fdiv_q_2exp(v.get_mpz_t(), q.label()[coord].get_mpz_t(), shift);
            if (v == 1 && units.size() < copies) {
                units.push_back(std::move(q));
                ++run_stats.final_targets;
            } else if (v == 0) {
                ++run_stats.final_zeros;
            }
        }
        if (stats.list_sizes.empty()) stats = run_stats;
        else {
            stats.final_targets += run_stats.final_targets;
            stats.final_zeros += run_stats.final_zeros;
        }
    }
    stats.queries = backend.oracle().queries() - before;
    if (units.empty()) throw SieveExhausted("collect_power_of_two_labels: no target labels produced");
    return units;
}

IntervalResult run_general_interval(QubitSource &source, const IntervalOptions &opts) {
    const BigInt n = source.modulus();
    if (n < 2) throw std::invalid_argument("run_general_interval: N must be >= 2");
    IntervalResult res;
    std::vector<PhaseQubit> units;
    try {
        units = collect_power_of_two_labels(source, 0, opts.unit_copies, res.stats, opts);
    } catch (const SieveExhausted &) {
        return res;
    }
    res.estimate = estimate_from_units(source.backend(), units, source.coordinate(), n);
    return res;
}

BigInt circular_distance(const BigInt &a, const BigInt &b, const BigInt &n) {
    BigInt d = mod(a - b, n);
    BigInt e = n - d;
    return d < e ? d : e;
}

}  // namespace dhsp
