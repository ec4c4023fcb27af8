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

#ifndef DHSP_STATEVEC_H
#define DHSP_STATEVEC_H

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dhsp/bigint.h"
#include "dhsp/oracle.h"

// Exact dense simulation on C[D_N] for small N. Basis index of y^t x^b is
// t * N + b. Used to validate the phase-qubit backend; the sieves never call it.
namespace dhsp::statevec {

using Complex = std::complex<double>;

constexpr unsigned long kMaxModulus = 1UL << 10;

struct PureState {
    Eigen::VectorXcd amp;

    size_t dim() const { return static_cast<size_t>(amp.size()); }
    double norm() const { return amp.norm(); }
};

struct DensityMatrix {
    Eigen::MatrixXcd rho;

    size_t dim() const { return static_cast<size_t>(rho.rows()); }
    /// Max deviation from unit trace, Hermiticity and PSD.
    double invariant_error() const;
};

PureState coset_state(unsigned long n, unsigned long s, unsigned long a);

/// (1/N) sum_a |H x^a><H x^a| for H = <y x^s>.
DensityMatrix rho_coset_mixture(unsigned long n, unsigned long s);

/// (1/2N) sum_g |S_{f(g)}><S_{f(g)}| with S_v the normalized level set of v.
/// Queries every element of D_N once.
DensityMatrix rho_from_oracle(HidingOracle &oracle);

/// Permutation matrix of left multiplication by y^t x^b.
Eigen::MatrixXcd left_multiplication(unsigned long n, bool t, unsigned long b);

/// psi_k = (|0> + exp(2 pi i k s / N)|1>) / sqrt 2.
PureState phase_qubit_state(const BigInt &k, const BigInt &s, const BigInt &n);

/// Distribution of the Fourier label k after F_N on the rotation register,
/// together with the normalized 2x2 residual state for each k.
struct FourierOutcomes {
    std::vector<double> probability;
    std::vector<DensityMatrix> residual;
};
FourierOutcomes qft_outcomes(const DensityMatrix &rho, unsigned long n);

/// Samples (k, residual) from F_N applied to rho_{D_N/H}.
std::pair<unsigned long, PureState> qft_measure_sim(unsigned long n, unsigned long s, Rng &rng);

/// Both branches of CNOT extraction on psi_k (x) psi_l: outcome 0 leaves
/// psi_{k+l}, outcome 1 leaves psi_{k-l}.
struct ExtractionBranches {
    double probability[2];
    PureState residual[2];
};
ExtractionBranches extract_branches(const BigInt &k, const BigInt &l, const BigInt &s, const BigInt &n);
std::pair<int, PureState> extract_sim(const BigInt &k, const BigInt &l, const BigInt &s, const BigInt &n, Rng &rng);

/// Half the trace norm of r1 - r2.
double trace_distance(const DensityMatrix &r1, const DensityMatrix &r2);
/// Sum of absolute eigenvalues of r1 - r2.
double trace_norm(const DensityMatrix &r1, const DensityMatrix &r2);

double fidelity(const PureState &a, const PureState &b);
double fidelity(const PureState &a, const DensityMatrix &rho);
/// Leading eigenvector of a (nearly) pure state.
PureState purify(const DensityMatrix &rho);

/// Probability of "+" for a qubit density matrix.
double plus_probability(const DensityMatrix &rho);
double plus_probability(const PureState &psi);

/// Exact joint law of (label k, +/- outcome) for rho_{D_N/H}: entry 2k + (0 for
/// "+", 1 for "-").
std::vector<double> label_pm_law(unsigned long n, unsigned long s);

/// The 2x2 images of x and y in the representation V_k.
std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> vk_generators(unsigned long k, unsigned long n);

}  // namespace dhsp::statevec

#endif  // DHSP_STATEVEC_H
