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

#ifndef DHSP_BIGINT_H
#define DHSP_BIGINT_H

#include <cstdint>
#include <random>
#include <string>

#include <gmpxx.h>

namespace dhsp {

using BigInt = mpz_class;
using Rng = std::mt19937_64;

/// Counter-based seed derivation (splitmix64 finalizer). Stream i of a root
/// seed is reproducible without generating streams 0..i-1.
uint64_t derive_seed(uint64_t root, uint64_t stream);

/// Least nonnegative residue of x mod n (n > 0).
BigInt mod(const BigInt &x, const BigInt &n);

/// Uniform integer in [0, n), n > 0.
BigInt uniform_below(const BigInt &n, Rng &rng);

/// r / n as a double in [0, 1) for 0 <= r < n, exact to 2^-64 before rounding.
double fraction(const BigInt &r, const BigInt &n);

/// Number of trailing zero bits; 0 maps to `cap`.
unsigned trailing_zeros(const BigInt &x, unsigned cap);

/// Bits [lo, lo + width) of a nonnegative x, width <= 64.
uint64_t bit_window(const BigInt &x, unsigned lo, unsigned width);

/// Multiplicative inverse of a modulo n; throws std::domain_error if none.
BigInt inverse_mod(const BigInt &a, const BigInt &n);

/// ceil(log2(x)) for x >= 1.
unsigned ceil_log2(const BigInt &x);

bool bernoulli(double p, Rng &rng);

inline std::string to_string(const BigInt &x) { return x.get_str(); }

}  // namespace dhsp

#endif  // DHSP_BIGINT_H
