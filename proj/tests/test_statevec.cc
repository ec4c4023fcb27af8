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

#include <boost/math/distributions/chi_squared.hpp>

#include "dhsp/bigint.h"
#include "dhsp/group.h"
#include "dhsp/oracle.h"
#include "dhsp/statevec.h"

using namespace dhsp;
using namespace dhsp::statevec;

namespace {

DensityMatrix pure(const PureState &p) { return {p.amp * p.amp.adjoint()}; }

}  // namespace

TEST_CASE("coset_state") {
    for (unsigned long n : {2UL, 5UL, 8UL})
        for (unsigned long s = 0; s < n; ++s)
            for (unsigned long a = 0; a < n; ++a) {
                auto psi = coset_state(n, s, a);
                CHECK(psi.dim() == 2 * n);
                CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
                // fixed by left multiplication with y x^s
                Eigen::VectorXcd moved = left_multiplication(n, true, s) * psi.amp;
                CHECK((moved - psi.amp).norm() < 1e-12);
            }
    auto psi = coset_state(2, 0, 0);
    // basis: 1, x, y, yx
    CHECK(std::abs(psi.amp[0] - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(psi.amp[1]) < 1e-12);
    CHECK(std::abs(psi.amp[2] - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(psi.amp[3]) < 1e-12);
}

TEST_CASE("rho_coset_mixture") {
    auto rho = rho_coset_mixture(2, 1);
    CHECK(std::abs(rho.rho.trace() - Complex(1.0)) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
    std::sort(ev.begin(), ev.end());
    CHECK(ev[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(ev[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(ev[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ev[3] == doctest::Approx(0.5).epsilon(1e-12));

    // 1/N prefactor: sum of projectors divided by N
    for (unsigned long n : {3UL, 8UL, 13UL}) {
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
        for (unsigned long a = 0; a < n; ++a) sum += pure(coset_state(n, 2 % n, a)).rho;
        CHECK((rho_coset_mixture(n, 2 % n).rho - sum / double(n)).norm() < 1e-12);
    }
    CHECK_THROWS(rho_coset_mixture(kMaxModulus + 1, 0));
}

TEST_CASE("density matrix invariants and H-invariance") {
    for (unsigned long n = 1; n <= 32; ++n)
        for (unsigned long s = 0; s < n; s += 3) {
            auto rho = rho_coset_mixture(n, s);
            CHECK(rho.invariant_error() < 1e-10);
            auto h = left_multiplication(n, true, s);
            CHECK((h * rho.rho - rho.rho * h).norm() < 1e-12);
        }
}

TEST_CASE("rho_from_oracle agrees with the coset mixture for exact oracles") {
    for (unsigned long n : {4UL, 7UL, 16UL})
        for (unsigned long s = 0; s < n; ++s) {
            auto o = make_reflection_oracle(GroupCtx(BigInt(n)), BigInt(s));
            auto rho = rho_from_oracle(o);
            CHECK(o.queries() == 2 * n);
            CHECK((rho.rho - rho_coset_mixture(n, s).rho).norm() < 1e-12);
        }
}

TEST_CASE("qft_measure_sim") {
    SUBCASE("labels uniform at N=8") {
        Rng rng(31);
        const long samples = 100000;
        std::vector<long> counts(8, 0);
        for (long i = 0; i < samples; ++i) ++counts[qft_measure_sim(8, 3, rng).first];
        double chi2 = 0, e = samples / 8.0;
        for (long c : counts) chi2 += (c - e) * (c - e) / e;
        CHECK(boost::math::cdf(boost::math::complement(boost::math::chi_squared(7), chi2)) > 1e-3);
    }
    SUBCASE("residual is psi_k at N=16, s=5") {
        Rng rng(32);
        for (int i = 0; i < 2000; ++i) {
            auto [k, res] = qft_measure_sim(16, 5, rng);
            CHECK(fidelity(res, phase_qubit_state(BigInt(k), BigInt(5), BigInt(16))) >= 1 - 1e-10);
        }
    }
    SUBCASE("s = 0, per-k formula") {
        Rng rng(33);
        for (int i = 0; i < 500; ++i) {
            auto [k, res] = qft_measure_sim(12, 0, rng);
            CHECK(fidelity(res, phase_qubit_state(BigInt(k), BigInt(0), BigInt(12))) >= 1 - 1e-10);
        }
    }
    SUBCASE("exact outcome law") {
        auto out = qft_outcomes(rho_coset_mixture(9, 4), 9);
        for (unsigned long k = 0; k < 9; ++k) {
            CHECK(out.probability[k] == doctest::Approx(1.0 / 9).epsilon(1e-12));
            CHECK(fidelity(phase_qubit_state(BigInt(k), BigInt(4), BigInt(9)), out.residual[k]) >= 1 - 1e-10);
        }
    }
}

TEST_CASE("extraction, exhaustive at N=8") {
    for (long s = 0; s < 8; ++s)
        for (long k = 0; k < 8; ++k)
            for (long l = 0; l < 8; ++l) {
                auto br = extract_branches(BigInt(k), BigInt(l), BigInt(s), BigInt(8));
                CHECK(std::abs(br.probability[0] - 0.5) < 1e-12);
                CHECK(std::abs(br.probability[1] - 0.5) < 1e-12);
                CHECK(fidelity(br.residual[0], phase_qubit_state(BigInt(k + l), BigInt(s), BigInt(8))) >= 1 - 1e-10);
                CHECK(fidelity(br.residual[1], phase_qubit_state(BigInt(k - l), BigInt(s), BigInt(8))) >= 1 - 1e-10);
                for (int c = 0; c < 2; ++c) {
                    // relative phase of |1> against |0> is 2 pi (k +- l) s / N
                    const auto &a = br.residual[c].amp;
                    double want = 2 * M_PI * double((c ? k - l : k + l) * s) / 8.0;
                    Complex rel = a[1] / a[0];
                    CHECK(std::abs(rel - std::polar(1.0, want)) < 1e-10);
                }
            }
    Rng rng(34);
    for (int i = 0; i < 100; ++i) {
        auto [bit, res] = extract_sim(BigInt(0), BigInt(0), BigInt(3), BigInt(8), rng);
        CHECK((bit == 0 || bit == 1));
        CHECK(plus_probability(res) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("trace distance basics") {
    auto a = pure(coset_state(8, 3, 0)), b = pure(coset_state(8, 3, 1)), c = rho_coset_mixture(8, 5);
    CHECK(trace_distance(a, a) == doctest::Approx(0.0).scale(1.0));
    CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace_distance(a, c) == doctest::Approx(trace_distance(c, a)).epsilon(1e-12));
    CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12);
    CHECK(trace_distance(a, c) == doctest::Approx(0.5 * trace_norm(a, c)).epsilon(1e-12));
    CHECK_THROWS_AS(trace_distance(a, rho_coset_mixture(4, 1)), std::invalid_argument);
}

TEST_CASE("spliced mixture at N=8 with |s-t|=2") {
    auto inst = make_substring_instance(BigInt(8), BigInt(16), BigInt(5));
    auto o = splice_substring(inst, BigInt(3));
    auto rho_h = rho_from_oracle(o);
    auto rho = rho_coset_mixture(8, 2);
    // ||rho_h - rho|| = |s - t| / N in trace norm; the half-normalized distance is half that
    CHECK(trace_norm(rho_h, rho) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(trace_distance(rho_h, rho) == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(rho_h.invariant_error() < 1e-10);
}

TEST_CASE("V_k images") {
    for (unsigned long n : {1UL, 5UL, 8UL, 12UL})
        for (unsigned long k = 0; k < n; ++k) {
            auto [x, y] = vk_generators(k, n);
            Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
            Eigen::Matrix2cd xn = id;
            for (unsigned long i = 0; i < n; ++i) xn = xn * x;
            CHECK((xn - id).norm() < 1e-10);
            CHECK((y * y - id).norm() < 1e-12);
            CHECK((y * x * y * x - id).norm() < 1e-12);
            for (unsigned long s = 0; s < n; ++s) {
                Eigen::Matrix2cd g = y;
                for (unsigned long i = 0; i < s; ++i) g = g * x;
                auto psi = phase_qubit_state(BigInt(k), BigInt(s), BigInt(n));
                CHECK((g * psi.amp - psi.amp).norm() < 1e-10);
            }
        }
}
