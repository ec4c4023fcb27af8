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

#include "dhsp/statevec.h"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dhsp::statevec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_modulus(unsigned long n) {
    if (n < 1 || n > kMaxModulus) {
        throw std::invalid_argument("statevec: N must lie in [1, " + std::to_string(kMaxModulus) + "]");
    }
}

Complex unit_phase(double turns) { return std::polar(1.0, kTwoPi * turns); }

Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

double DensityMatrix::invariant_error() const {
    double err = std::abs(rho.trace() - Complex(1.0, 0.0));
    err = std::max(err, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    Eigen::MatrixXcd herm = (rho + rho.adjoint()) / 2.0;
    double min_eig = eigenvalues(herm).minCoeff();
    return std::max(err, std::max(0.0, -min_eig));
}

PureState coset_state(unsigned long n, unsigned long s, unsigned long a) {
    check_modulus(n);
    PureState psi{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(2 * n))};
    const double r = 1.0 / std::sqrt(2.0);
    psi.amp(static_cast<Eigen::Index>(a % n)) += r;
    psi.amp(static_cast<Eigen::Index>(n + (s + a) % n)) += r;
    return psi;
}

DensityMatrix rho_coset_mixture(unsigned long n, unsigned long s) {
    check_modulus(n);
    const auto dim = static_cast<Eigen::Index>(2 * n);
    DensityMatrix out{Eigen::MatrixXcd::Zero(dim, dim)};
    for (unsigned long a = 0; a < n; ++a) {
        PureState psi = coset_state(n, s, a);
        out.rho += psi.amp * psi.amp.adjoint();
    }
    out.rho /= static_cast<double>(n);
    return out;
}

DensityMatrix rho_from_oracle(HidingOracle &oracle) {
    const unsigned long n = oracle.modulus().get_ui();
    check_modulus(n);
    std::map<OracleValue, std::vector<Eigen::Index>> level_sets;
    for (unsigned long t = 0; t < 2; ++t) {
        for (unsigned long b = 0; b < n; ++b) {
            OracleValue v = oracle.evaluate(DihedralElement{t == 1, BigInt(b)});
            level_sets[v].push_back(static_cast<Eigen::Index>(t * n + b));
        }
    }
    const auto dim = static_cast<Eigen::Index>(2 * n);
    DensityMatrix out{Eigen::MatrixXcd::Zero(dim, dim)};
    for (const auto &[value, members] : level_sets) {
        for (auto i : members)
            for (auto j : members) out.rho(i, j) += 1.0;
    }
    out.rho /= static_cast<double>(2 * n);
    return out;
}

Eigen::MatrixXcd left_multiplication(unsigned long n, bool t, unsigned long b) {
    check_modulus(n);
    const auto dim = static_cast<Eigen::Index>(2 * n);
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
    GroupCtx ctx{BigInt(n)};
    const DihedralElement g{t, BigInt(b % n)};
    for (unsigned long ht = 0; ht < 2; ++ht) {
        for (unsigned long hb = 0; hb < n; ++hb) {
            DihedralElement gh = dmul(g, DihedralElement{ht == 1, BigInt(hb)}, ctx);
            auto row = static_cast<Eigen::Index>((gh.t ? n : 0) + gh.b.get_ui());
            p(row, static_cast<Eigen::Index>(ht * n + hb)) = 1.0;
        }
    }
    return p;
}

PureState phase_qubit_state(const BigInt &k, const BigInt &s, const BigInt &n) {
    PureState psi{Eigen::VectorXcd(2)};
    const double r = 1.0 / std::sqrt(2.0);
    psi.amp(0) = r;
    psi.amp(1) = r * unit_phase(fraction(mod(k * s, n), n));
    return psi;
}

FourierOutcomes qft_outcomes(const DensityMatrix &rho, unsigned long n) {
    check_modulus(n);
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd f(nn, nn);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index k = 0; k < nn; ++k)
        for (Eigen::Index b = 0; b < nn; ++b)
            f(k, b) = scale * unit_phase(static_cast<double>((static_cast<unsigned long>(k * b)) % n) /
                                         static_cast<double>(n));
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * nn, 2 * nn);
    u.topLeftCorner(nn, nn) = f;
    u.bottomRightCorner(nn, nn) = f;
    Eigen::MatrixXcd out = u * rho.rho * u.adjoint();

    FourierOutcomes res;
    res.probability.resize(n);
    res.residual.resize(n);
    for (Eigen::Index k = 0; k < nn; ++k) {
        Eigen::Matrix2cd block;
        block(0, 0) = out(k, k);
        block(0, 1) = out(k, nn + k);
        block(1, 0) = out(nn + k, k);
        block(1, 1) = out(nn + k, nn + k);
        double p = block.trace().real();
        res.probability[static_cast<size_t>(k)] = p;
        res.residual[static_cast<size_t>(k)].rho = p > 0 ? Eigen::MatrixXcd(block / p) : Eigen::MatrixXcd(block);
    }
    return res;
}

std::pair<unsigned long, PureState> qft_measure_sim(unsigned long n, unsigned long s, Rng &rng) {
    FourierOutcomes outcomes = qft_outcomes(rho_coset_mixture(n, s), n);
    std::discrete_distribution<unsigned long> pick(outcomes.probability.begin(), outcomes.probability.end());
    unsigned long k = pick(rng);
    return {k, purify(outcomes.residual[k])};
}

ExtractionBranches extract_branches(const BigInt &k, const BigInt &l, const BigInt &s, const BigInt &n) {
    PureState a = phase_qubit_state(k, s, n), b = phase_qubit_state(l, s, n);
    // |a, b> at index 2a + b; CNOT maps it to |a, a xor b>.
    Eigen::Vector4cd joint;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) joint(2 * x + (x ^ y)) = a.amp(x) * b.amp(y);
    ExtractionBranches out;
    for (int o = 0; o < 2; ++o) {
        Eigen::VectorXcd left(2);
        left(0) = joint(o);
        left(1) = joint(2 + o);
        double p = left.squaredNorm();
        out.probability[o] = p;
        out.residual[o].amp = left / std::sqrt(p);
    }
    return out;
}

std::pair<int, PureState> extract_sim(const BigInt &k, const BigInt &l, const BigInt &s, const BigInt &n, Rng &rng) {
    ExtractionBranches br = extract_branches(k, l, s, n);
    int o = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < br.probability[0] ? 0 : 1;
    return {o, br.residual[o]};
}

double trace_norm(const DensityMatrix &r1, const DensityMatrix &r2) {
    if (r1.dim() != r2.dim()) throw std::invalid_argument("trace distance: dimension mismatch");
    Eigen::MatrixXcd diff = r1.rho - r2.rho;
    diff = (diff + diff.adjoint()) / 2.0;
    return eigenvalues(diff).cwiseAbs().sum();
}

double trace_distance(const DensityMatrix &r1, const DensityMatrix &r2) { return 0.5 * trace_norm(r1, r2); }

double fidelity(const PureState &a, const PureState &b) { return std::norm(a.amp.dot(b.amp)); }

double fidelity(const PureState &a, const DensityMatrix &rho) {
    return (a.amp.adjoint() * rho.rho * a.amp)(0, 0).real();
}

PureState purify(const DensityMatrix &rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho);
    const auto last = es.eigenvalues().size() - 1;
    return PureState{es.eigenvectors().col(last)};
}

double plus_probability(const DensityMatrix &rho) {
    // <+|rho|+> = (rho00 + rho11 + 2 Re rho01) / 2.
    return 0.5 * (rho.rho(0, 0).real() + rho.rho(1, 1).real() + 2.0 * rho.rho(0, 1).real());
}

double plus_probability(const PureState &psi) {
    return 0.5 * std::norm(psi.amp(0) + psi.amp(1));
}

std::vector<double> label_pm_law(unsigned long n, unsigned long s) {
    FourierOutcomes outcomes = qft_outcomes(rho_coset_mixture(n, s), n);
    std::vector<double> law(2 * n);
    for (unsigned long k = 0; k < n; ++k) {
        double plus = plus_probability(outcomes.residual[k]);
        law[2 * k] = outcomes.probability[k] * plus;
        law[2 * k + 1] = outcomes.probability[k] * (1.0 - plus);
    }
    return law;
}

std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> vk_generators(unsigned long k, unsigned long n) {
    Eigen::Matrix2cd x = Eigen::Matrix2cd::Zero(), y = Eigen::Matrix2cd::Zero();
    const double turns = static_cast<double>(k % n) / static_cast<double>(n);
    x(0, 0) = unit_phase(turns);
    x(1, 1) = unit_phase(-turns);
    y(0, 1) = 1.0;
    y(1, 0) = 1.0;
    return {x, y};
}

}  // namespace dhsp::statevec
