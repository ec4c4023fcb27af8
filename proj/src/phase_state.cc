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

#include "dhsp/phase_state.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace dhsp {

namespace detail {

// The only reader of hidden slopes.
struct SecretAccess {
    static const std::vector<BigInt> &slope(const HidingOracle &o) { return o.secret_; }
    static bool hides_reflection(const HidingOracle &o) { return o.reflection_; }
    static bool samplable(const HidingOracle &o) { return o.kind_ != "subgroup"; }
    static void count_query(HidingOracle &o) { ++*o.queries_; }
};

}  // namespace detail

using detail::SecretAccess;

namespace {

std::atomic<uint64_t> next_backend_id{1};

constexpr double kPi = std::numbers::pi;

}  // namespace

PhaseQubit::PhaseQubit(PhaseQubit &&other) noexcept
    : label_(std::move(other.label_)),
      phase_(std::move(other.phase_)),
      backend_(other.backend_),
      classical_(other.classical_),
      consumed_(other.consumed_) {
    other.consumed_ = true;
}

PhaseQubit &PhaseQubit::operator=(PhaseQubit &&other) noexcept {
    if (this != &other) {
        label_ = std::move(other.label_);
        phase_ = std::move(other.phase_);
        backend_ = other.backend_;
        classical_ = other.classical_;
        consumed_ = other.consumed_;
        other.consumed_ = true;
    }
    return *this;
}

PhaseBackend::PhaseBackend(HidingOracle &oracle, Rng &rng, BackendFaults faults)
    : oracle_(&oracle), rng_(&rng), faults_(faults), id_(next_backend_id.fetch_add(1)) {
    if (!SecretAccess::samplable(oracle)) {
        throw std::invalid_argument("PhaseBackend: oracle hides a rotation subgroup; pass to the quotient first");
    }
}

void PhaseBackend::check_usable(const PhaseQubit &q) const {
    if (q.consumed_) throw QubitReuseError("phase qubit already consumed");
    if (q.backend_ != id_) throw QubitReuseError("phase qubit belongs to a different backend");
}

PhaseQubit PhaseBackend::make_qubit(std::vector<BigInt> label, bool classical) {
    PhaseQubit q;
    q.label_ = std::move(label);
    q.backend_ = id_;
    q.classical_ = classical;
    return q;
}

double PhaseBackend::phase_fraction(const PhaseQubit &q, const std::vector<BigInt> *t) const {
    const auto &orders = oracle_->orders();
    const auto &s = SecretAccess::slope(*oracle_);
    const auto &k = q.phase_ ? *q.phase_ : q.label_;
    double acc = 0.0;
    for (size_t j = 0; j < orders.size(); ++j) {
        if (k[j] == 0) continue;
        BigInt diff = t ? BigInt(s[j] - (*t)[j]) : s[j];
        acc += fraction(mod(k[j] * diff, orders[j]), orders[j]);
    }
    return acc - std::floor(acc);
}

PhaseQubit PhaseBackend::sample_phase_qubit() {
    SecretAccess::count_query(*oracle_);
    const auto &orders = oracle_->orders();
    std::vector<BigInt> label;
    label.reserve(orders.size());
    for (const auto &n : orders) label.push_back(uniform_below(n, *rng_));
    bool classical = !SecretAccess::hides_reflection(*oracle_) || bernoulli(oracle_->corruption_rate(), *rng_);
    return make_qubit(std::move(label), classical);
}

PhaseBackend::Extraction PhaseBackend::combine(PhaseQubit &a, PhaseQubit &b) {
    check_usable(a);
    check_usable(b);
    if (&a == &b) throw QubitReuseError("combine: a qubit cannot be paired with itself");
    a.consumed_ = b.consumed_ = true;
    const auto &orders = oracle_->orders();
    const bool sum = bernoulli(faults_.sum_probability, *rng_);
    std::vector<BigInt> label(orders.size());
    for (size_t j = 0; j < orders.size(); ++j) {
        label[j] = mod(sum ? BigInt(a.label_[j] + b.label_[j]) : BigInt(a.label_[j] - b.label_[j]), orders[j]);
    }
    PhaseQubit out = make_qubit(std::move(label), a.classical_ || b.classical_);
    const bool flip = faults_.phase_sign_flip;
    if (a.phase_ || b.phase_ || flip) {
        const auto &ka = a.phase_ ? *a.phase_ : a.label_;
        const auto &kb = b.phase_ ? *b.phase_ : b.label_;
        const bool phase_sum = flip ? !sum : sum;
        std::vector<BigInt> phase(orders.size());
        for (size_t j = 0; j < orders.size(); ++j) {
            phase[j] = mod(phase_sum ? BigInt(ka[j] + kb[j]) : BigInt(ka[j] - kb[j]), orders[j]);
        }
        if (phase != out.label_) out.phase_ = std::move(phase);
    }
    return {std::move(out), !sum};
}

PhaseQubit PhaseBackend::negate_label(PhaseQubit &q) {
    check_usable(q);
    q.consumed_ = true;
    const auto &orders = oracle_->orders();
    std::vector<BigInt> label(orders.size());
    for (size_t j = 0; j < orders.size(); ++j) label[j] = mod(-q.label_[j], orders[j]);
    PhaseQubit out = make_qubit(std::move(label), q.classical_);
    if (q.phase_) {
        std::vector<BigInt> phase(orders.size());
        for (size_t j = 0; j < orders.size(); ++j) phase[j] = mod(-(*q.phase_)[j], orders[j]);
        out.phase_ = std::move(phase);
    }
    return out;
}

bool PhaseBackend::measure_pm(PhaseQubit &q) {
    check_usable(q);
    q.consumed_ = true;
    if (q.classical_) return bernoulli(0.5, *rng_);
    double c = std::cos(kPi * phase_fraction(q, nullptr));
    return bernoulli(c * c, *rng_);
}

bool PhaseBackend::cosine_observe(PhaseQubit &q, const std::vector<BigInt> &t) {
    check_usable(q);
    if (t.size() != oracle_->orders().size()) throw std::invalid_argument("cosine_observe: reference rank mismatch");
    q.consumed_ = true;
    if (q.classical_) return bernoulli(0.5, *rng_);
    double c = std::cos(kPi * phase_fraction(q, &t));
    return bernoulli(c * c, *rng_);
}

double hoyer_probability(const BigInt &s, const BigInt &n, const BigInt &m, const BigInt &t) {
    // d = M s / N - t, reduced to the nearest representative mod M.
    mpq_class d(BigInt(m * s), n);
    d -= mpq_class(t);
    d.canonicalize();
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), d.get_num_mpz_t(), d.get_den_mpz_t());
    mpq_class frac = d - mpq_class(fl);
    BigInt q = mod(fl, m);
    if (2 * q >= m) q -= m;
    double dd = frac.get_d() + q.get_d();
    if (dd == 0.0) return 1.0;
    double md = m.get_d();
    double num = std::sin(kPi * dd);
    double den = std::isfinite(md) && md < 0x1p50 ? md * std::sin(kPi * dd / md) : kPi * dd;
    return (num * num) / (den * den);
}

BigInt PhaseBackend::hoyer_readout(std::vector<PhaseQubit> &qs) {
    const BigInt &n = modulus();
    if (qs.empty()) throw std::invalid_argument("hoyer_readout: no qubits");
    const size_t count = qs.size();
    std::vector<bool> seen(count, false);
    for (auto &q : qs) {
        check_usable(q);
        if (q.classical_) throw std::invalid_argument("hoyer_readout: classical qubit in register");
        const BigInt &k = q.phase_ ? (*q.phase_)[0] : q.label_[0];
        if (k == 0 || mpz_popcount(k.get_mpz_t()) != 1) {
            throw std::invalid_argument("hoyer_readout: labels must be 1, 2, ..., 2^kappa");
        }
        size_t i = mpz_scan1(k.get_mpz_t(), 0);
        if (i >= count || seen[i]) throw std::invalid_argument("hoyer_readout: labels must be 1, 2, ..., 2^kappa");
        seen[i] = true;
    }
    for (auto &q : qs) q.consumed_ = true;

    BigInt m = 1;
    m <<= count;
    const BigInt s = SecretAccess::slope(*oracle_)[0];
    // Peak near x = M s / N; write x = base + frac.
    BigInt scaled = m * s;
    BigInt base;
    mpz_fdiv_q(base.get_mpz_t(), scaled.get_mpz_t(), n.get_mpz_t());
    const double frac = fraction(mod(scaled, n), n);
    const double md = m.get_d();
    auto prob = [&](double d) {
        if (d == 0.0) return 1.0;
        double num = std::sin(kPi * d);
        double den = md < 0x1p50 ? md * std::sin(kPi * d / md) : kPi * d;
        return (num * num) / (den * den);
    };

    const long window = md <= 0x1p20 ? static_cast<long>(md / 2) : (1L << 16);
    const long lo = -window, hi = md <= 0x1p20 ? static_cast<long>(md) - window - 1 : window;
    std::vector<double> weights;
    weights.reserve(static_cast<size_t>(hi - lo + 1));
    double mass = 0.0;
    for (long j = lo; j <= hi; ++j) {
        weights.push_back(prob(frac - static_cast<double>(j)));
        mass += weights.back();
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long chosen = 0;
    if (md <= 0x1p20 || unit(*rng_) < mass) {
        std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
        chosen = lo + static_cast<long>(pick(*rng_));
    } else {
        // Tail beyond the window: rejection against the 1/(4 d^2) envelope.
        const double a = static_cast<double>(window) + 0.5, b = md / 2;
        while (true) {
            double u = unit(*rng_);
            double x = 1.0 / (1.0 / a - u * (1.0 / a - 1.0 / b));
            long j = std::lround(x) * (bernoulli(0.5, *rng_) ? 1 : -1);
            double d = frac - static_cast<double>(j);
            if (unit(*rng_) < prob(d) * 4.0 * d * d) {
                chosen = j;
                break;
            }
        }
    }
    return mod(base + chosen, m);
}

size_t PhaseBackend::tomography_copies_needed(unsigned long r, double failure_bound) {
    if (r <= 1) return 0;
    if (r == 2) return 1;
    return static_cast<size_t>(std::ceil(2.0 * static_cast<double>(r) * std::log(static_cast<double>(r) / failure_bound)));
}

BigInt PhaseBackend::tomography_mod_r(std::vector<PhaseQubit> &qs, unsigned long r, double failure_bound) {
    if (r == 0) throw std::invalid_argument("tomography_mod_r: r must be positive");
    for (auto &q : qs) check_usable(q);
    if (r == 1) {
        for (auto &q : qs) q.consumed_ = true;
        return 0;
    }
    const BigInt &n = modulus();
    if (!mpz_divisible_ui_p(n.get_mpz_t(), r)) throw std::invalid_argument("tomography_mod_r: r must divide N");
    const BigInt step = n / r;
    std::vector<unsigned long> multipliers;
    std::vector<PhaseQubit *> informative;
    for (auto &q : qs) {
        if (mod(q.label_[0], step) != 0) throw std::invalid_argument("tomography_mod_r: label not a multiple of N/r");
        unsigned long a = BigInt(q.label_[0] / step).get_ui();
        if (a != 0) {
            multipliers.push_back(a);
            informative.push_back(&q);
        }
    }
    if (informative.size() < tomography_copies_needed(r, failure_bound)) {
        throw InsufficientCopiesError("tomography_mod_r: " + std::to_string(informative.size()) +
                                      " informative copies, need " +
                                      std::to_string(tomography_copies_needed(r, failure_bound)));
    }
    const unsigned long quarter = std::max(1UL, static_cast<unsigned long>(std::lround(static_cast<double>(r) / 4.0)));
    std::vector<double> loglik(r, 0.0);
    for (size_t i = 0; i < informative.size(); ++i) {
        const unsigned long ref = (i % 2 == 0) ? 0 : quarter;
        const bool outcome = cosine_observe(*informative[i], BigInt(ref));
        for (unsigned long rho = 0; rho < r; ++rho) {
            double angle = kPi * static_cast<double>((multipliers[i] * ((rho + r - ref) % r)) % r) / static_cast<double>(r);
            double p = std::cos(angle) * std::cos(angle);
            double like = outcome ? p : 1.0 - p;
            loglik[rho] += std::log(std::max(like, 1e-6));
        }
    }
    for (auto &q : qs) q.consumed_ = true;
    return BigInt(static_cast<unsigned long>(std::max_element(loglik.begin(), loglik.end()) - loglik.begin()));
}

}  // namespace dhsp
