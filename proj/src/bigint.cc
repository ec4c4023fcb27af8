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

#include "dhsp/bigint.h"

#include <stdexcept>

namespace dhsp {

uint64_t derive_seed(uint64_t root, uint64_t stream) {
    uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

BigInt mod(const BigInt &x, const BigInt &n) {
    BigInt r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), n.get_mpz_t());
    return r;
}

BigInt uniform_below(const BigInt &n, Rng &rng) {
    if (mpz_fits_ulong_p(n.get_mpz_t())) {
        unsigned long bound = n.get_ui();
        std::uniform_int_distribution<unsigned long> dist(0, bound - 1);
        return BigInt(dist(rng));
    }
    // Rejection sampling on the bit length of n.
    size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    size_t words = (bits + 63) / 64;
    BigInt r;
    while (true) {
        r = 0;
        for (size_t i = 0; i < words; ++i) {
            r <<= 64;
            uint64_t w = rng();
            BigInt part;
            mpz_import(part.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
            r += part;
        }
        mpz_fdiv_r_2exp(r.get_mpz_t(), r.get_mpz_t(), bits);
        if (r < n) return r;
    }
}

double fraction(const BigInt &r, const BigInt &n) {
    if (mpz_fits_ulong_p(n.get_mpz_t())) {
        return static_cast<double>(r.get_ui()) / static_cast<double>(n.get_ui());
    }
    BigInt scaled = r;
    scaled <<= 64;
    mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), n.get_mpz_t());
    uint64_t w = 0;
    size_t count = 0;
    mpz_export(&w, &count, -1, sizeof(w), 0, 0, scaled.get_mpz_t());
    return static_cast<double>(w) * 0x1p-64;
}

unsigned trailing_zeros(const BigInt &x, unsigned cap) {
    if (x == 0) return cap;
    return static_cast<unsigned>(mpz_scan1(x.get_mpz_t(), 0));
}

uint64_t bit_window(const BigInt &x, unsigned lo, unsigned width) {
    if (width == 0) return 0;
    if (mpz_fits_ulong_p(x.get_mpz_t()) && lo < 64) {
        uint64_t v = x.get_ui() >> lo;
        return width >= 64 ? v : (v & ((uint64_t{1} << width) - 1));
    }
    BigInt t;
    mpz_fdiv_q_2exp(t.get_mpz_t(), x.get_mpz_t(), lo);
    mpz_fdiv_r_2exp(t.get_mpz_t(), t.get_mpz_t(), width);
    uint64_t w = 0;
    size_t count = 0;
    mpz_export(&w, &count, -1, sizeof(w), 0, 0, t.get_mpz_t());
    return w;
}

BigInt inverse_mod(const BigInt &a, const BigInt &n) {
    BigInt r;
    if (n == 1) return 0;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t()) == 0) {
        throw std::domain_error("inverse_mod: " + a.get_str() + " is not a unit mod " + n.get_str());
    }
    return r;
}

unsigned ceil_log2(const BigInt &x) {
    if (x <= 1) return 0;
    BigInt y = x - 1;
    return static_cast<unsigned>(mpz_sizeinbase(y.get_mpz_t(), 2));
}

bool bernoulli(double p, Rng &rng) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace dhsp
