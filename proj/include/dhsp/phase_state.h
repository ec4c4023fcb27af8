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

#ifndef DHSP_PHASE_STATE_H
#define DHSP_PHASE_STATE_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/oracle.h"

namespace dhsp {

class QubitReuseError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

class InsufficientCopiesError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Fault injection for mutation testing of the statistical checks.
struct BackendFaults {
    /// Probability that extraction lands on the sum k + l.
    double sum_probability = 0.5;
    /// Extraction reports k +/- l but leaves the state in the other branch.
    bool phase_sign_flip = false;
};

/// The qubit |0> + exp(2 pi i <k, s>) |1>, known only by its label k. Single use:
/// any consuming operation (and moving from it) marks it consumed.
class PhaseQubit {
  public:
    PhaseQubit(const PhaseQubit &) = delete;
    PhaseQubit &operator=(const PhaseQubit &) = delete;
    PhaseQubit(PhaseQubit &&other) noexcept;
    PhaseQubit &operator=(PhaseQubit &&other) noexcept;

    const std::vector<BigInt> &label() const { return label_; }
    /// Coordinate 0, for cyclic backends.
    const BigInt &k() const { return label_[0]; }
    bool classical() const { return classical_; }
    bool consumed() const { return consumed_; }
    uint64_t backend_id() const { return backend_; }

  private:
    friend class PhaseBackend;
    PhaseQubit() = default;

    std::vector<BigInt> label_;
    // Set only when a fault makes the carried state disagree with the label.
    std::optional<std::vector<BigInt>> phase_;
    uint64_t backend_ = 0;
    bool classical_ = false;
    bool consumed_ = false;
};

/// Measurement layer over one hiding oracle. Owns no randomness of its own:
/// draws from the trial's RNG stream. Confined to one thread.
class PhaseBackend {
  public:
    PhaseBackend(HidingOracle &oracle, Rng &rng, BackendFaults faults = {});

    const std::vector<BigInt> &orders() const { return oracle_->orders(); }
    const BigInt &modulus() const { return oracle_->modulus(); }
    HidingOracle &oracle() { return *oracle_; }
    Rng &rng() { return *rng_; }
    uint64_t id() const { return id_; }

    /// One query: a Fourier-sampled label, uniform on A.
    PhaseQubit sample_phase_qubit();

    struct Extraction {
        PhaseQubit qubit;
        /// True when the label is k - l, false for k + l.
        bool difference;
    };
    /// CNOT extraction: consumes both, returns k + l or k - l with a fair coin.
    Extraction combine(PhaseQubit &a, PhaseQubit &b);

    /// psi_k -> psi_{-k} (bit flip). Consumes the input.
    PhaseQubit negate_label(PhaseQubit &q);

    /// True for "+", with probability cos^2(pi <k, s>).
    bool measure_pm(PhaseQubit &q);

    /// 1 with probability cos^2(pi <k, s - t>).
    bool cosine_observe(PhaseQubit &q, const std::vector<BigInt> &t);
    bool cosine_observe(PhaseQubit &q, const BigInt &t) { return cosine_observe(q, std::vector<BigInt>{t}); }

    /// Phase estimation on psi_1, psi_2, ..., psi_{2^kappa}: samples t in
    /// [0, M), M = 2^{kappa+1}, with t / M ~ s / N.
    BigInt hoyer_readout(std::vector<PhaseQubit> &qs);

    /// Maximum likelihood s mod r from copies with labels a N / r.
    BigInt tomography_mod_r(std::vector<PhaseQubit> &qs, unsigned long r, double failure_bound = 0.01);

    static size_t tomography_copies_needed(unsigned long r, double failure_bound);

  private:
    void check_usable(const PhaseQubit &q) const;
    PhaseQubit make_qubit(std::vector<BigInt> label, bool classical);
    /// <k, s - t> mod 1 for the carried state.
    double phase_fraction(const PhaseQubit &q, const std::vector<BigInt> *t) const;

    HidingOracle *oracle_;
    Rng *rng_;
    BackendFaults faults_;
    uint64_t id_;
};

/// Probability of outcome t in phase estimation with M = 2^{kappa+1} on phase
/// s/N, from the closed-form kernel.
double hoyer_probability(const BigInt &s, const BigInt &n, const BigInt &m, const BigInt &t);

}  // namespace dhsp

#endif  // DHSP_PHASE_STATE_H
