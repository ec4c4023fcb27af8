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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/group.h"
#include "dhsp/oracle.h"
#include "dhsp/phase_state.h"
#include "dhsp/sieve_staged.h"

using namespace dhsp;

namespace {

HidingOracle pow2_oracle(unsigned n, const BigInt &s) { return make_reflection_oracle(GroupCtx(BigInt(BigInt(1) << n)), s); }

unsigned trailing_zeros(const BigInt &k) { return k == 0 ? ~0u : static_cast<unsigned>(mpz_scan1(k.get_mpz_t(), 0)); }

}  // namespace

TEST_CASE("list size schedule") {
    auto c = list_size_schedule(1, 40);
    CHECK(c[0] == 3.0);
    CHECK(c[1] == doctest::Approx(3.0 / (1.0 - std::pow(2.0, -4.0 / 3.0)) + 0.25).epsilon(1e-12));
    // the quoted 5.2246 agrees with the recursion to three significant figures only
    CHECK(c[1] == doctest::Approx(5.2246).epsilon(5e-4));
    for (unsigned m = 1; m <= 64; ++m) {
        auto cm = list_size_schedule(m, 200);
        // strictly increasing until the 2^{-2k} term drops below double resolution
        for (size_t k = 1; k < cm.size(); ++k) {
            if (k <= 20) CHECK(cm[k] > cm[k - 1]);
            else CHECK(cm[k] >= cm[k - 1]);
        }
        CHECK(cm.back() < 9.0);
    }
    CHECK(initial_list_size(2) == 3 * 64);
    CHECK(staged_config(10).m == 3);
    CHECK(staged_config(10).initial_size == 3 * 512);
    CHECK(staged_config(2).m == 1);
}

TEST_CASE("match_by_suffix") {
    std::vector<BigInt> labels = {BigInt(0b0100), BigInt(0b1100), BigInt(0b0110)};
    auto m = match_by_suffix(labels, 2, 1);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0] == std::make_pair(size_t(0), size_t(1)));
    REQUIRE(m.leftovers.size() == 1);
    CHECK(m.leftovers[0] == 2);

    auto empty = match_by_suffix({}, 0, 3);
    CHECK(empty.pairs.empty());
    CHECK(empty.leftovers.empty());

    Rng rng(41);
    std::vector<BigInt> big;
    for (int i = 0; i < 10000; ++i) big.push_back(uniform_below(BigInt(1) << 20, rng) << 3);
    auto bm = match_by_suffix(big, 3, 3);
    CHECK(bm.leftovers.size() <= 8);
    CHECK(2 * bm.pairs.size() + bm.leftovers.size() == big.size());
    for (auto [i, j] : bm.pairs) CHECK(((big[i] >> 3) & 7) == ((big[j] >> 3) & 7));
}

TEST_CASE("staged parity is correct whenever it returns") {
    for (unsigned n = 2; n <= 10; ++n) {
        Rng rng(derive_seed(42, n));
        const BigInt bound = BigInt(1) << staged_config(n).m * 3;
        int answered = 0;
        for (int trial = 0; trial < 100; ++trial) {
            BigInt s = uniform_below(BigInt(BigInt(1) << n), rng);
            auto o = pow2_oracle(n, s);
            PhaseBackend b(o, rng);
            DirectSource src(b);
            auto r = run_staged_parity(src, n);
            CHECK(o.queries() <= 3 * bound);
            CHECK(r.stats.queries == o.queries());
            if (!r.parity) continue;
            ++answered;
            CHECK_MESSAGE(*r.parity == (mpz_odd_p(s.get_mpz_t()) != 0), "n=" << n << " s=" << s.get_str());
        }
        CHECK(answered > 0);
    }
}

TEST_CASE("stage invariant: trailing zeros grow by the window") {
    Rng rng(43);
    const unsigned n = 12;
    auto o = pow2_oracle(n, BigInt(1234));
    PhaseBackend b(o, rng);
    std::vector<PhaseQubit> list;
    for (int i = 0; i < 6000; ++i) list.push_back(b.sample_phase_qubit());
    SieveStats stats;
    list = zero_low_bits(b, std::move(list), 0, 9, 3, stats);
    CHECK(stats.list_sizes.size() == 4);
    CHECK_FALSE(list.empty());
    for (const auto &q : list) CHECK(trailing_zeros(q.k()) >= 9);
    // each combine consumes two and yields at most one
    for (size_t j = 0; j + 1 < stats.list_sizes.size(); ++j)
        CHECK(stats.list_sizes[j + 1] <= stats.pair_counts[j]);
}

TEST_CASE("survival ratio is about a quarter") {
    const unsigned n = 10;
    const size_t threshold = 4u << staged_config(n).m;
    double sum = 0;
    size_t count = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(derive_seed(44, trial));
        auto o = pow2_oracle(n, uniform_below(BigInt(1024), rng));
        PhaseBackend b(o, rng);
        DirectSource src(b);
        auto r = run_staged_parity(src, n);
        auto ratios = r.stats.survival_ratios();
        for (size_t j = 0; j < ratios.size(); ++j)
            if (r.stats.list_sizes[j] >= threshold) sum += ratios[j], ++count;
    }
    REQUIRE(count > 0);
    double mean = sum / count;
    CHECK(mean >= 0.20);
    CHECK(mean <= 0.30);
}

TEST_CASE("final-stage top bit is unbiased") {
    const unsigned n = 9;
    size_t targets = 0, zeros = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Rng rng(derive_seed(45, trial));
        auto o = pow2_oracle(n, uniform_below(BigInt(512), rng));
        PhaseBackend b(o, rng);
        DirectSource src(b);
        auto r = run_staged_parity(src, n);
        targets += r.stats.final_targets;
        zeros += r.stats.final_zeros;
    }
    const double total = double(targets + zeros);
    REQUIRE(total > 100);
    double sd = std::sqrt(0.25 / total);
    CHECK(std::abs(targets / total - 0.5) <= 3 * sd);
}

TEST_CASE("interval sieve on N=1000") {
    const BigInt n(1000);
    int close = 0, answered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(derive_seed(46, trial));
        BigInt s = uniform_below(n, rng);
        auto o = make_reflection_oracle(GroupCtx(n), s);
        PhaseBackend b(o, rng);
        DirectSource src(b);
        auto r = run_general_interval(src);
        if (!r.estimate) continue;
        ++answered;
        close += circular_distance(*r.estimate, s, n) <= n / 4;
    }
    CHECK(close * 3 >= 100 * 2);
    CHECK(answered > 0);
}

TEST_CASE("interval sieve with s = 0") {
    const BigInt n(1000);
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(derive_seed(47, trial));
        auto o = make_reflection_oracle(GroupCtx(n), BigInt(0));
        PhaseBackend b(o, rng);
        DirectSource src(b);
        auto r = run_general_interval(src);
        REQUIRE(r.estimate);
        CHECK(circular_distance(*r.estimate, BigInt(0), n) <= n / 8);
    }
}

TEST_CASE("interval rounds leave labels in {0, 1} after normalization") {
    Rng rng(48);
    const BigInt n(5000);
    auto o = make_reflection_oracle(GroupCtx(n), BigInt(77));
    PhaseBackend b(o, rng);
    std::vector<PhaseQubit> list;
    for (int i = 0; i < 20000; ++i) list.push_back(b.sample_phase_qubit());
    SieveStats stats;
    auto out = interval_rounds(b, std::move(list), 0, 0, stats);
    CHECK_FALSE(out.empty());
    for (const auto &q : out) CHECK((q.k() == 0 || q.k() == 1 || q.k() == n - 1));
    CHECK(stats.list_sizes.size() == interval_depth(n) + 1);
}

TEST_CASE("circular distance") {
    CHECK(circular_distance(BigInt(1), BigInt(999), BigInt(1000)) == 2);
    CHECK(circular_distance(BigInt(250), BigInt(0), BigInt(1000)) == 250);
    CHECK(circular_distance(BigInt(600), BigInt(0), BigInt(1000)) == 400);
}
