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

#ifndef DHSP_SIEVE_STAGED_H
#define DHSP_SIEVE_STAGED_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/phase_state.h"

namespace dhsp {

/// A stream of phase qubits whose labels are supported on one coordinate of
/// the backend's group (the others are zero).
class QubitSource {
  public:
    virtual ~QubitSource() = default;

    virtual PhaseBackend &backend() = 0;
    virtual size_t coordinate() const = 0;
    /// Throws SieveExhausted when no further qubit can be produced.
    virtual PhaseQubit draw() = 0;

    const BigInt &modulus() { return backend().orders()[coordinate()]; }
};

/// Fourier samples straight from a rank-one backend.
class DirectSource final : public QubitSource {
  public:
    explicit DirectSource(PhaseBackend &backend);

    PhaseBackend &backend() override { return *backend_; }
    size_t coordinate() const override { return 0; }
    PhaseQubit draw() override { return backend_->sample_phase_qubit(); }

  private:
    PhaseBackend *backend_;
};

class SieveExhausted : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SieveStats {
    uint64_t queries = 0;
    std::vector<size_t> list_sizes;  // |L_j|
    std::vector<size_t> pair_counts; // |P_j|
    std::vector<size_t> leftovers;
    size_t final_targets = 0;        // copies of the target label in L_m
    size_t final_zeros = 0;          // zero labels in L_m

    /// |L_{j+1}| / |L_j| for each stage.
    std::vector<double> survival_ratios() const;
};

struct StagedConfig {
    unsigned m = 1;
    std::vector<double> C;  // C_0, C_1, ...
    size_t initial_size = 0;
};

/// C_0 = 3, C_k = C_{k-1} / (1 - 2^{-k-m/3}) + 2^{-2k}, for k = 0..terms.
std::vector<double> list_size_schedule(unsigned m, size_t terms);
/// C_0 * 2^{3m}.
size_t initial_list_size(unsigned m);
/// m = ceil(sqrt(n - 1)) (at least 1) with the matching schedule.
StagedConfig staged_config(unsigned n);
/// m = ceil(sqrt(log2 N - 2)) (at least 1).
unsigned interval_depth(const BigInt &n);

struct Matching {
    std::vector<std::pair<size_t, size_t>> pairs;
    std::vector<size_t> leftovers;
};

/// Maximal matching of labels agreeing on bits [lo, lo + width), bucketed in
/// input order. At most 2^width leftovers.
Matching match_by_suffix(const std::vector<BigInt> &labels, unsigned lo, unsigned width);

/// Staged rounds that raise the number of trailing zeros of every label to
/// `target_bits`, `window` bits per round, keeping difference-form results.
/// Requires 2^target_bits | N for the source coordinate.
std::vector<PhaseQubit> zero_low_bits(PhaseBackend &backend, std::vector<PhaseQubit> list, size_t coord,
                                      unsigned target_bits, unsigned window, SieveStats &stats);

/// Interval rounds on labels k = 2^shift * v: normalizes v into [0, N'/2],
/// N' = N / 2^shift, pairs within buckets of width 2^{m^2 - m(j+1) + 1} and
/// keeps |v - w|. Survivors have v in {0, 1}.
std::vector<PhaseQubit> interval_rounds(PhaseBackend &backend, std::vector<PhaseQubit> list, size_t coord,
                                        unsigned shift, SieveStats &stats);

struct StagedOptions {
    double budget_scale = 1.0;
    /// Majority over up to this many psi_{N/2} copies.
    size_t parity_votes = 7;
};

struct ParityResult {
    std::optional<bool> parity;  // empty on exhaustion
    SieveStats stats;
};

/// Power-of-two staged sieve: returns s mod 2 for N = 2^n.
ParityResult run_staged_parity(QubitSource &source, unsigned n, const StagedOptions &opts = {});

struct IntervalOptions {
    double budget_scale = 1.0;
    size_t unit_copies = 24;
    size_t max_runs = 16;
};

struct IntervalResult {
    std::optional<BigInt> estimate;  // circular error <= N/4 with probability >= 2/3
    SieveStats stats;
};

/// General-N interval sieve followed by quadrature cosine estimation.
IntervalResult run_general_interval(QubitSource &source, const IntervalOptions &opts = {});

/// Copies of psi_{2^shift} (labels k = +/-2^shift) by zeroing the low `shift`
/// bits and then running interval rounds on k / 2^shift. Throws SieveExhausted
/// after `max_runs` list refills.
std::vector<PhaseQubit> collect_power_of_two_labels(QubitSource &source, unsigned shift, size_t copies,
                                                    SieveStats &stats, const IntervalOptions &opts = {});

/// Circular distance |a - b| on Z/N.
BigInt circular_distance(const BigInt &a, const BigInt &b, const BigInt &n);

}  // namespace dhsp

#endif  // DHSP_SIEVE_STAGED_H
