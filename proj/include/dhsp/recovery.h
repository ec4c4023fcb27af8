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

#ifndef DHSP_RECOVERY_H
#define DHSP_RECOVERY_H

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/group.h"
#include "dhsp/oracle.h"
#include "dhsp/phase_state.h"
#include "dhsp/sieve_staged.h"

namespace dhsp {

/// Raised when no candidate passes verification within the retry cap.
class NoHiddenReflection : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LevelReport {
    unsigned level = 0;
    uint64_t queries = 0;
    size_t attempts = 0;
    SieveStats stats;
};

struct RecoveryReport {
    BigInt secret;
    uint64_t queries = 0;
    std::vector<LevelReport> levels;
    bool verified = false;
    size_t attempts = 0;
};

using SlopeVerifier = std::function<bool(const BigInt &)>;
/// Builds the qubit source used on one (possibly wrapped) backend.
using SourceFactory = std::function<std::unique_ptr<QubitSource>(PhaseBackend &)>;

struct RecoveryOptions {
    size_t retry_cap = 6;
    /// Retries of a single sieve call that produced no usable output.
    size_t level_retries = 4;
    double budget_scale = 1.0;
    /// Cosine observations per refinement level (split over two references).
    size_t observations = 48;
    /// Defaults to checking f(x^0) = f(y x^s) on the oracle.
    SlopeVerifier verifier;
    BackendFaults faults;
};

/// f(x^0) == f(y x^s); two queries.
bool verify_slope(HidingOracle &o, const BigInt &s);

RecoveryReport recover_slope_power2(HidingOracle &o, unsigned n, Rng &rng, const RecoveryOptions &opts = {});

RecoveryReport recover_slope_general(HidingOracle &o, Rng &rng, const RecoveryOptions &opts = {});

/// Slope of one coordinate, without final verification. The factory
/// decides where qubits come from.
BigInt recover_coordinate(HidingOracle &o, size_t coord, Rng &rng, const RecoveryOptions &opts,
                          const SourceFactory &factory, RecoveryReport &report);

struct SubstringOptions {
    RecoveryOptions recovery;
    size_t max_guesses = 64;
    size_t check_samples = 32;
};

struct SubstringReport {
    BigInt shift;
    std::vector<BigInt> guesses;  // t values tried, in order
    uint64_t queries = 0;
};

/// Guess t: 0, N/2, N/4, 3N/4, N/8, ...
std::vector<BigInt> guess_grid(const BigInt &n, size_t count);

SubstringReport solve_substring(const SubstringInstance &inst, Rng &rng, const SubstringOptions &opts = {});

struct AbelianOptions {
    RecoveryOptions recovery;
    /// Greedy list size per ProjectedSource batch (0: derived from the group).
    uint64_t batch_budget = 0;
    size_t check_samples = 32;
};

struct AbelianReport {
    std::vector<BigInt> shift;  // free coordinates as signed integers
    uint64_t queries = 0;
    size_t attempts = 0;
};

AbelianReport solve_abelian_shift(const ShiftPair &p, Rng &rng, const AbelianOptions &opts = {});
/// Same, on o = shift_to_dihedral(p) owned by the caller.
AbelianReport solve_abelian_shift(const ShiftPair &p, HidingOracle &o, Rng &rng, const AbelianOptions &opts = {});

struct HiddenSubgroup {
    BigInt d;                    // H intersect <x> = <x^d>
    std::optional<BigInt> slope; // set when y x^slope is in H
};

std::vector<BigInt> divisors(const BigInt &n);

/// Classical order finding on <x>, then slope recovery on the quotient.
HiddenSubgroup find_hidden_subgroup(HidingOracle &o, Rng &rng, const RecoveryOptions &opts = {});

}  // namespace dhsp

#endif  // DHSP_RECOVERY_H
