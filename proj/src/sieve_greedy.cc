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

#include "dhsp/sieve_greedy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace dhsp {

unsigned alpha_radix(const BigInt &k, unsigned long r, unsigned n) {
    if (r < 2) throw std::invalid_argument("alpha_radix: r must be >= 2");
    if (k == 0) return 0;
    if (r == 2) return std::min<unsigned>(n, static_cast<unsigned>(mpz_scan1(k.get_mpz_t(), 0)));
    BigInt x = k;
    unsigned a = 0;
    while (a < n && mpz_divisible_ui_p(x.get_mpz_t(), r)) {
        mpz_divexact_ui(x.get_mpz_t(), x.get_mpz_t(), r);
        ++a;
    }
    return a;
}

namespace {

unsigned coordinate_width(const BigInt &n) { return 1 + ceil_log2(n + 1); }

}  // namespace

unsigned alpha_abelian(const std::vector<BigInt> &k, const std::vector<BigInt> &orders) {
    if (k.size() != orders.size() || k.empty()) throw std::invalid_argument("alpha_abelian: rank mismatch");
    unsigned total = 0;
    const size_t a = k.size();
    for (size_t j = 0; j < a; ++j) {
        total += coordinate_width(orders[j]);
        if (j + 1 < a && k[j] != 0) return total - ceil_log2(k[j] + 1);
    }
    return total;
}

double value_estimate(unsigned alpha, unsigned n) {
    if (n == 0) return 1.0;
    const double beta = std::max(0.0, static_cast<double>(n) - 1.0 - static_cast<double>(alpha));
    return std::pow(3.0, -std::sqrt(2.0 * beta));
}

RadixObjective::RadixObjective(unsigned long r, unsigned n, size_t coord)
    : RadixObjective(std::vector<unsigned long>(n, r), coord) {}

RadixObjective::RadixObjective(std::vector<unsigned long> radices, size_t coord)
    : radices_(std::move(radices)), modulus_(1), coord_(coord), binary_(true) {
    for (unsigned long b : radices_) {
        if (b < 2) throw std::invalid_argument("RadixObjective: digit bases must be >= 2");
        modulus_ *= b;
        binary_ = binary_ && b == 2;
    }
}

std::vector<uint64_t> RadixObjective::digits(const BigInt &k) const {
    std::vector<uint64_t> out(radices_.size());
    if (binary_) {
        for (size_t i = 0; i < out.size(); ++i) out[i] = mpz_tstbit(k.get_mpz_t(), i);
        return out;
    }
    BigInt x = k;
    for (size_t i = 0; i < out.size(); ++i) out[i] = mpz_tdiv_q_ui(x.get_mpz_t(), x.get_mpz_t(), radices_[i]);
    return out;
}

unsigned RadixObjective::alpha(const std::vector<BigInt> &k) const {
    const BigInt &x = k[coord_];
    if (x == 0) return 0;
    if (binary_) return std::min<unsigned>(max_alpha(), static_cast<unsigned>(mpz_scan1(x.get_mpz_t(), 0)));
    const auto d = digits(x);
    unsigned a = 0;
    while (a < d.size() && d[a] == 0) ++a;
    return a;
}

bool RadixObjective::prefer_negation(const std::vector<BigInt> &k) const {
    const BigInt &x = k[coord_];
    if (x == 0) return false;
    const unsigned a = alpha(k);
    const auto d = digits(x);
    const auto e = digits(mod(-x, modulus_));
    for (size_t i = a; i < d.size(); ++i) {
        if (d[i] != e[i]) return e[i] < d[i];
    }
    return false;
}

std::vector<uint64_t> RadixObjective::key(const std::vector<BigInt> &k, unsigned alpha) const {
    auto d = digits(k[coord_]);
    d.erase(d.begin(), d.begin() + std::min<size_t>(alpha, d.size()));
    return d;
}

double RadixObjective::affinity(const std::vector<uint64_t> &a, const std::vector<uint64_t> &b) const {
    size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    return static_cast<double>(i);
}

AbelianObjective::AbelianObjective(std::vector<BigInt> orders, std::vector<size_t> perm) : perm_(std::move(perm)) {
    if (orders.empty()) throw std::invalid_argument("AbelianObjective: empty group");
    if (perm_.empty()) {
        for (size_t i = 0; i < orders.size(); ++i) perm_.push_back(i);
    }
    if (perm_.size() != orders.size()) throw std::invalid_argument("AbelianObjective: permutation size");
    for (size_t i : perm_) {
        if (i >= orders.size()) throw std::invalid_argument("AbelianObjective: permutation entry");
        orders_.push_back(orders[i]);
    }
    for (const auto &n : orders_) {
        full_ += coordinate_width(n);
        limbs_ = std::max(limbs_, mpz_size(n.get_mpz_t()));
    }
}

size_t AbelianObjective::leading(const std::vector<BigInt> &k) const {
    for (size_t i = 0; i < perm_.size(); ++i)
        if (k[perm_[i]] != 0) return i;
    return perm_.size();
}

unsigned AbelianObjective::alpha(const std::vector<BigInt> &k) const {
    std::vector<BigInt> ordered;
    ordered.reserve(perm_.size());
    for (size_t i : perm_) ordered.push_back(k[i]);
    return alpha_abelian(ordered, orders_);
}

bool AbelianObjective::prefer_negation(const std::vector<BigInt> &k) const {
    const size_t b = leading(k);
    if (b + 1 >= perm_.size()) return false;
    const BigInt &x = k[perm_[b]];
    return orders_[b] - x < x;
}

std::vector<uint64_t> AbelianObjective::key(const std::vector<BigInt> &k, unsigned) const {
    const size_t b = leading(k);
    std::vector<uint64_t> out(limbs_ + 1, 0);
    out[0] = b;
    if (b < perm_.size()) {
        const mpz_srcptr x = k[perm_[b]].get_mpz_t();
        const size_t used = mpz_size(x);
        for (size_t i = 0; i < used; ++i) out[limbs_ - i] = mpz_getlimbn(x, i);
    }
    return out;
}

double AbelianObjective::affinity(const std::vector<uint64_t> &a, const std::vector<uint64_t> &b) const {
    if (a[0] != b[0]) return -std::ldexp(1.0, 1000);
    long double gap = 0;
    for (size_t i = 1; i < a.size(); ++i) {
        gap = gap * 18446744073709551616.0L + (static_cast<long double>(a[i]) - static_cast<long double>(b[i]));
    }
    return -static_cast<double>(std::fabs(gap));
}

namespace {

struct Entry {
    std::optional<PhaseQubit> q;
    std::vector<uint64_t> key;
};

class GreedyRun {
  public:
    GreedyRun(PhaseBackend &backend, const Objective &obj, const LabelPredicate &target, const GreedyOptions &opts)
        : backend_(backend), obj_(obj), target_(target), opts_(opts) {}

    GreedyResult run(std::vector<PhaseQubit> list) {
        const uint64_t before = backend_.oracle().queries();
        res_.stats.sieve.list_sizes.push_back(list.size());
        for (auto &q : list) {
            if (done()) break;
            place(std::move(q), std::nullopt);
        }
        while (!done() && !pending_.empty()) {
            auto it = pending_.begin();
            const unsigned alpha = it->first;
            std::vector<size_t> members = std::move(it->second);
            pending_.erase(it);
            sieve_bucket(alpha, members);
            res_.stats.sieve.list_sizes.push_back(live_count());
        }
        res_.stats.sieve.final_targets = res_.targets.size();
        res_.stats.sieve.queries += backend_.oracle().queries() - before;
        return std::move(res_);
    }

  private:
    struct KeyLess {
        const std::vector<Entry> *entries;
        bool operator()(size_t a, size_t b) const {
            const auto &ka = (*entries)[a].key;
            const auto &kb = (*entries)[b].key;
            if (ka != kb) return ka < kb;
            return a < b;
        }
    };
    struct Candidate {
        double affinity;
        uint64_t seq;
        size_t a, b;
        bool operator<(const Candidate &o) const {
            if (affinity != o.affinity) return affinity < o.affinity;
            return seq > o.seq;
        }
    };
    using Bucket = std::set<size_t, KeyLess>;

    bool done() const { return opts_.targets_wanted > 0 && res_.targets.size() >= opts_.targets_wanted; }

    size_t live_count() const {
        size_t n = 0;
        for (const auto &[a, v] : pending_) n += v.size();
        return n;
    }

    // Returns the entry index when the qubit lands in a bucket.
    std::optional<size_t> place(PhaseQubit q, std::optional<unsigned> current) {
        const auto &label = q.label();
        bool zero = std::all_of(label.begin(), label.end(), [](const BigInt &x) { return x == 0; });
        if (zero) {
            ++res_.stats.sieve.final_zeros;
            if (opts_.keep_zeros) res_.targets.push_back(std::move(q));
            else ++res_.stats.discarded_zeros;
            return std::nullopt;
        }
        const unsigned alpha = obj_.alpha(label);
        res_.stats.max_alpha = std::max(res_.stats.max_alpha, alpha);
        if (target_ && target_(label)) {
            res_.targets.push_back(std::move(q));
            return std::nullopt;
        }
        if (obj_.prefer_negation(label)) q = backend_.negate_label(q);
        Entry e;
        e.key = obj_.key(q.label(), alpha);
        e.q.emplace(std::move(q));
        entries_.push_back(std::move(e));
        const size_t idx = entries_.size() - 1;
        ++res_.stats.bucket_ops;
        if (current && *current == alpha) return idx;
        pending_[alpha].push_back(idx);
        return std::nullopt;
    }

    void push_pair(size_t a, size_t b) {
        heap_.push({obj_.affinity(entries_[a].key, entries_[b].key), seq_++, a, b});
    }

    void check_optimal(const Bucket &bucket, double chosen) const {
        std::vector<size_t> items(bucket.begin(), bucket.end());
        double best = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < items.size(); ++i)
            for (size_t j = i + 1; j < items.size(); ++j)
                best = std::max(best, obj_.affinity(entries_[items[i]].key, entries_[items[j]].key));
        if (chosen < best) throw std::logic_error("greedy_sieve: chosen pair is not the best in its bucket");
    }

    void sieve_bucket(unsigned alpha, const std::vector<size_t> &members) {
        Bucket bucket(KeyLess{&entries_});
        for (size_t i : members) bucket.insert(i);
        heap_ = {};
        for (auto it = bucket.begin(); it != bucket.end() && std::next(it) != bucket.end(); ++it) {
            push_pair(*it, *std::next(it));
        }
        size_t pairs = 0;
        while (bucket.size() >= 2 && !heap_.empty() && !done()) {
            Candidate c = heap_.top();
            heap_.pop();
            auto ia = bucket.find(c.a);
            if (ia == bucket.end()) continue;
            auto ib = std::next(ia);
            if (ib == bucket.end() || *ib != c.b) continue;
            if (opts_.check_every > 0 && res_.stats.combines % opts_.check_every == 0) {
                check_optimal(bucket, c.affinity);
            }
            std::optional<size_t> prev, next;
            if (ia != bucket.begin()) prev = *std::prev(ia);
            if (std::next(ib) != bucket.end()) next = *std::next(ib);
            bucket.erase(ia);
            bucket.erase(c.b);
            res_.stats.bucket_ops += 2;
            if (prev && next) push_pair(*prev, *next);

            auto ext = backend_.combine(*entries_[c.a].q, *entries_[c.b].q);
            entries_[c.a].q.reset();
            entries_[c.b].q.reset();
            ++res_.stats.combines;
            ++pairs;
            CombineEvent ev{alpha, c.affinity, ext.difference, 0, false};
            const auto &label = ext.qubit.label();
            ev.zero = std::all_of(label.begin(), label.end(), [](const BigInt &x) { return x == 0; });
            if (!ev.zero) ev.alpha_after = obj_.alpha(label);
            if (opts_.on_combine) opts_.on_combine(ev);

            auto idx = place(std::move(ext.qubit), alpha);
            if (idx) {
                auto [pos, inserted] = bucket.insert(*idx);
                if (pos != bucket.begin()) push_pair(*std::prev(pos), *pos);
                if (std::next(pos) != bucket.end()) push_pair(*pos, *std::next(pos));
            }
        }
        res_.stats.sieve.pair_counts.push_back(pairs);
        res_.stats.sieve.leftovers.push_back(bucket.size());
        res_.stats.discarded_singletons += bucket.size();
        for (size_t i : bucket) entries_[i].q.reset();
    }

    PhaseBackend &backend_;
    const Objective &obj_;
    const LabelPredicate &target_;
    const GreedyOptions &opts_;
    GreedyResult res_;
    std::vector<Entry> entries_;
    std::map<unsigned, std::vector<size_t>> pending_;
    std::priority_queue<Candidate> heap_;
    uint64_t seq_ = 0;
};

}  // namespace

GreedyResult greedy_sieve(PhaseBackend &backend, const Objective &obj, const LabelPredicate &target,
                          std::vector<PhaseQubit> list, const GreedyOptions &opts) {
    GreedyRun run(backend, obj, target, opts);
    GreedyResult res = run.run(std::move(list));
    if (res.targets.empty() && opts.targets_wanted > 0) throw SieveExhausted("greedy_sieve: no target labels");
    return res;
}

GreedyResult greedy_sieve(PhaseBackend &backend, const Objective &obj, const LabelPredicate &target, uint64_t budget,
                          const GreedyOptions &opts) {
    if (budget < 2) throw std::invalid_argument("greedy_sieve: budget must be >= 2");
    const uint64_t before = backend.oracle().queries();
    std::vector<PhaseQubit> list;
    list.reserve(budget);
    for (uint64_t i = 0; i < budget; ++i) list.push_back(backend.sample_phase_qubit());
    GreedyRun run(backend, obj, target, opts);
    GreedyResult res = run.run(std::move(list));
    res.stats.sieve.queries = backend.oracle().queries() - before;
    if (res.targets.empty() && opts.targets_wanted > 0) throw SieveExhausted("greedy_sieve: no target labels");
    return res;
}

uint64_t default_greedy_budget(unsigned long r, unsigned n) {
    if (n <= 1) return 2;
    const double m = std::ceil(std::sqrt(static_cast<double>(n) - 1.0));
    const double q = 3.0 * std::pow(static_cast<double>(r), 3.0 * m);
    return static_cast<uint64_t>(std::min(q, 1.0 * (1u << 22)));
}

RadixRecoveryResult run_radix_recovery(PhaseBackend &backend, unsigned long r, unsigned n, uint64_t budget,
                                       double failure_bound) {
    if (r < 2 || n < 1) throw std::invalid_argument("run_radix_recovery: need r >= 2 and n >= 1");
    BigInt expect;
    mpz_ui_pow_ui(expect.get_mpz_t(), r, n);
    if (backend.orders().size() != 1 || backend.modulus() != expect) {
        throw std::invalid_argument("run_radix_recovery: N must equal r^n");
    }
    if (budget == 0) budget = default_greedy_budget(r, n);
    const size_t copies = PhaseBackend::tomography_copies_needed(r, failure_bound);
    RadixObjective obj(r, n);
    const BigInt step = expect / r;
    LabelPredicate target = [&](const std::vector<BigInt> &k) { return k[0] != 0 && mod(k[0], step) == 0; };

    RadixRecoveryResult out;
    std::vector<PhaseQubit> pool;
    if (n == 1) {
        // Every nonzero sample already qualifies; no sieving.
        while (pool.size() < copies) {
            PhaseQubit q = backend.sample_phase_qubit();
            ++out.stats.sieve.queries;
            if (q.k() != 0) pool.push_back(std::move(q));
        }
    }
    constexpr size_t kMaxRuns = 64;
    for (size_t run = 0; run < kMaxRuns && pool.size() < copies; ++run) {
        GreedyOptions opts;
        opts.targets_wanted = copies - pool.size();
        GreedyResult res;
        try {
            res = greedy_sieve(backend, obj, target, budget, opts);
        } catch (const SieveExhausted &) {
            out.stats.sieve.queries += budget;
            continue;
        }
        out.stats.sieve.queries += res.stats.sieve.queries;
        out.stats.combines += res.stats.combines;
        out.stats.bucket_ops += res.stats.bucket_ops;
        out.stats.max_alpha = std::max(out.stats.max_alpha, res.stats.max_alpha);
        for (auto &q : res.targets) pool.push_back(std::move(q));
    }
    if (pool.empty()) throw SieveExhausted("run_radix_recovery: no labels divisible by N/r");
    out.copies_used = pool.size();
    out.residue = backend.tomography_mod_r(pool, r, failure_bound);
    return out;
}

ProjectedSource::ProjectedSource(PhaseBackend &backend, size_t coord, uint64_t batch_budget, size_t max_batches)
    : backend_(&backend), coord_(coord), batch_budget_(batch_budget), max_batches_(max_batches) {
    const size_t rank = backend.orders().size();
    if (coord >= rank) throw std::out_of_range("ProjectedSource: coordinate");
    if (batch_budget < 2) throw std::invalid_argument("ProjectedSource: batch budget must be >= 2");
    std::vector<size_t> perm;
    for (size_t i = 0; i < rank; ++i)
        if (i != coord) perm.push_back(i);
    perm.push_back(coord);
    objective_ = std::make_unique<AbelianObjective>(backend.orders(), std::move(perm));
}

PhaseQubit ProjectedSource::draw() {
    if (backend_->orders().size() == 1) return backend_->sample_phase_qubit();
    const size_t c = coord_;
    LabelPredicate target = [c](const std::vector<BigInt> &k) {
        for (size_t i = 0; i < k.size(); ++i)
            if (i != c && k[i] != 0) return false;
        return k[c] != 0;
    };
    while (pool_.empty()) {
        if (batches_ >= max_batches_) throw SieveExhausted("ProjectedSource: batch limit reached");
        ++batches_;
        // psi_0 lies in the coordinate subgroup too; the interval rounds need it
        // when N is small enough that the last bucket is the first one.
        GreedyOptions opts;
        opts.keep_zeros = true;
        GreedyResult res = greedy_sieve(*backend_, *objective_, target, batch_budget_, opts);
        for (auto &q : res.targets) pool_.push_back(std::move(q));
    }
    PhaseQubit q = std::move(pool_.front());
    pool_.pop_front();
    return q;
}

}  // namespace dhsp
