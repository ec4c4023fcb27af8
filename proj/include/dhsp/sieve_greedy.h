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

#ifndef DHSP_SIEVE_GREEDY_H
#define DHSP_SIEVE_GREEDY_H

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/group.h"
#include "dhsp/phase_state.h"
#include "dhsp/sieve_staged.h"

namespace dhsp {

/// Number of factors of r in k, with alpha(0) = 0.
unsigned alpha_radix(const BigInt &k, unsigned long r, unsigned n);

/// Coordinate objective for A = Z/N_1 + ... + Z/N_a (1-based b in the formula).
unsigned alpha_abelian(const std::vector<BigInt> &k, const std::vector<BigInt> &orders);

/// 3^{-sqrt(2 (n - 1 - alpha))}. Diagnostic only.
double value_estimate(unsigned alpha, unsigned n);

/// Label ordering and scoring used by greedy_sieve.
class Objective {
  public:
    virtual ~Objective() = default;

    virtual unsigned alpha(const std::vector<BigInt> &k) const = 0;
    /// Upper bound on alpha for nonzero labels.
    virtual unsigned max_alpha() const = 0;
    /// True when -k is the canonical representative of {k, -k}.
    virtual bool prefer_negation(const std::vector<BigInt> &k) const = 0;
    /// Sort key inside an alpha bucket; good partners end up adjacent.
    virtual std::vector<uint64_t> key(const std::vector<BigInt> &k, unsigned alpha) const = 0;
    /// Larger is better. Only called on keys adjacent in sorted order.
    virtual double affinity(const std::vector<uint64_t> &a, const std::vector<uint64_t> &b) const = 0;
};

/// Digits of k in a mixed radix (uniform radix r by default).
class RadixObjective final : public Objective {
  public:
    RadixObjective(unsigned long r, unsigned n, size_t coord = 0);
    /// Digit i has base radices[i]; the modulus is their product.
    RadixObjective(std::vector<unsigned long> radices, size_t coord = 0);

    unsigned alpha(const std::vector<BigInt> &k) const override;
    unsigned max_alpha() const override { return static_cast<unsigned>(radices_.size()); }
    bool prefer_negation(const std::vector<BigInt> &k) const override;
    std::vector<uint64_t> key(const std::vector<BigInt> &k, unsigned alpha) const override;
    double affinity(const std::vector<uint64_t> &a, const std::vector<uint64_t> &b) const override;

    std::vector<uint64_t> digits(const BigInt &k) const;
    const BigInt &modulus() const { return modulus_; }

  private:
    std::vector<unsigned long> radices_;
    BigInt modulus_;
    size_t coord_;
    bool binary_;
};

/// Section-6 objective. perm[i] is the label coordinate read at position
/// i (identity by default); the last position is the one being isolated.
class AbelianObjective final : public Objective {
  public:
    explicit AbelianObjective(std::vector<BigInt> orders, std::vector<size_t> perm = {});

    unsigned alpha(const std::vector<BigInt> &k) const override;
    unsigned max_alpha() const override { return full_; }
    bool prefer_negation(const std::vector<BigInt> &k) const override;
    std::vector<uint64_t> key(const std::vector<BigInt> &k, unsigned alpha) const override;
    double affinity(const std::vector<uint64_t> &a, const std::vector<uint64_t> &b) const override;

  private:
    size_t leading(const std::vector<BigInt> &k) const;

    std::vector<BigInt> orders_;  // in objective order
    std::vector<size_t> perm_;
    unsigned full_ = 0;
    size_t limbs_ = 1;
};

struct CombineEvent {
    unsigned alpha_before;
    double affinity;
    bool difference;
    unsigned alpha_after;  // 0 when the result is the zero label
    bool zero;
};

struct GreedyOptions {
    /// Stop after this many targets (0: run until the buckets are empty).
    size_t targets_wanted = 0;
    /// Brute-force the best pair every this many combines (0: off).
    size_t check_every = 0;
    std::function<void(const CombineEvent &)> on_combine;
    /// Hand zero labels to the caller with the targets instead of dropping
    /// them. They never re-enter a bucket either way.
    bool keep_zeros = false;
};

struct GreedyStats {
    SieveStats sieve;
    unsigned max_alpha = 0;  // over every label seen, including the initial list
    uint64_t combines = 0;
    uint64_t bucket_ops = 0;
    uint64_t discarded_zeros = 0;
    uint64_t discarded_singletons = 0;
};

struct GreedyResult {
    std::vector<PhaseQubit> targets;
    GreedyStats stats;
};

using LabelPredicate = std::function<bool(const std::vector<BigInt> &)>;

/// Fills the list with `budget` samples and sieves greedily. Throws
/// SieveExhausted when no target is found and targets were requested.
GreedyResult greedy_sieve(PhaseBackend &backend, const Objective &obj, const LabelPredicate &target, uint64_t budget,
                          const GreedyOptions &opts = {});

/// Same, over a list that is already populated.
GreedyResult greedy_sieve(PhaseBackend &backend, const Objective &obj, const LabelPredicate &target,
                          std::vector<PhaseQubit> list, const GreedyOptions &opts = {});

struct RadixRecoveryResult {
    BigInt residue;
    GreedyStats stats;
    size_t copies_used = 0;
};

/// s mod r for N = r^n.
RadixRecoveryResult run_radix_recovery(PhaseBackend &backend, unsigned long r, unsigned n,
                                       uint64_t budget = 0, double failure_bound = 0.01);

/// List size for one greedy run on r^n.
uint64_t default_greedy_budget(unsigned long r, unsigned n);

/// Qubits whose label is zero outside one coordinate, produced by the
/// abelian greedy sieve on demand.
class ProjectedSource final : public QubitSource {
  public:
    ProjectedSource(PhaseBackend &backend, size_t coord, uint64_t batch_budget, size_t max_batches = 64);

    PhaseBackend &backend() override { return *backend_; }
    size_t coordinate() const override { return coord_; }
    PhaseQubit draw() override;

    uint64_t batches() const { return batches_; }

  private:
    PhaseBackend *backend_;
    size_t coord_;
    std::unique_ptr<AbelianObjective> objective_;
    uint64_t batch_budget_;
    size_t max_batches_;
    uint64_t batches_ = 0;
    std::deque<PhaseQubit> pool_;
};

}  // namespace dhsp

#endif  // DHSP_SIEVE_GREEDY_H
