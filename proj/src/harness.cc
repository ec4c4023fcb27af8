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

#include "dhsp/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "dhsp/oracle.h"
#include "dhsp/recovery.h"
#include "dhsp/sieve_greedy.h"
#include "dhsp/sieve_staged.h"
#include "dhsp/statevec.h"

namespace dhsp {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (trials < 1) throw UsageError("trials must be >= 1");
    if (format != "csv" && format != "json") throw UsageError("format must be csv or json");
    if (algorithm != "staged" && algorithm != "general" && algorithm != "greedy" && algorithm != "abelian") {
        throw UsageError("unknown algorithm '" + algorithm + "'");
    }
    if (radix < 2) throw UsageError("radix must be >= 2");
    if (!std::is_sorted(budgets.begin(), budgets.end())) throw UsageError("budgets must be ascending");
    if (nmax < 1 || nmax > 1024) throw UsageError("nmax must be in [1, 1024]");
    if (retry_cap < 1) throw UsageError("retry_cap must be >= 1");
}

namespace {

BigInt big_from_json(const json &v) {
    if (v.is_number_unsigned()) return BigInt(std::to_string(v.get<uint64_t>()));
    if (v.is_number_integer()) return BigInt(std::to_string(v.get<int64_t>()));
    if (v.is_string()) return BigInt(v.get<std::string>());
    throw UsageError("expected an integer");
}

}  // namespace

ExperimentConfig config_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    ExperimentConfig cfg;
    try {
        for (const auto &[raw, v] : j.items()) {
            std::string key = raw;
            std::replace(key.begin(), key.end(), '-', '_');
            if (key == "mode") cfg.mode = v.get<std::string>();
            else if (key == "algorithm") cfg.algorithm = v.get<std::string>();
            else if (key == "n") cfg.n = v.get<unsigned>();
            else if (key == "N") cfg.N = big_from_json(v);
            else if (key == "orders") {
                cfg.orders.clear();
                for (const auto &x : v) cfg.orders.push_back(big_from_json(x));
            } else if (key == "radix") cfg.radix = v.get<unsigned long>();
            else if (key == "trials") cfg.trials = v.get<size_t>();
            else if (key == "budget" || key == "budgets") {
                if (v.is_string()) cfg.budgets = parse_budgets(v.get<std::string>());
                else if (v.is_array()) cfg.budgets = v.get<std::vector<uint64_t>>();
                else cfg.budgets = {v.get<uint64_t>()};
            } else if (key == "seed") cfg.seed = v.get<uint64_t>();
            else if (key == "format") cfg.format = v.get<std::string>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "in") cfg.in = v.get<std::string>();
            else if (key == "retry_cap") cfg.retry_cap = v.get<size_t>();
            else if (key == "label_bits") cfg.label_bits = v.get<unsigned>();
            else if (key == "nmax") cfg.nmax = v.get<unsigned long>();
            else if (key == "samples") cfg.samples = v.get<uint64_t>();
            else if (key == "timing") cfg.timing = v.get<bool>();
            else if (key == "workers") cfg.workers = v.get<size_t>();
            else throw UsageError("config: unknown key '" + key + "'");
        }
    } catch (const json::exception &e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return cfg;
}

namespace {

uint64_t parse_power(const std::string &s) {
    size_t caret = s.find('^');
    try {
        if (caret == std::string::npos) return std::stoull(s);
        uint64_t base = std::stoull(s.substr(0, caret));
        uint64_t exp = std::stoull(s.substr(caret + 1));
        uint64_t v = 1;
        for (uint64_t i = 0; i < exp; ++i) {
            if (v > UINT64_MAX / std::max<uint64_t>(base, 1)) throw UsageError("budget overflows 64 bits: " + s);
            v *= base;
        }
        return v;
    } catch (const std::logic_error &) {
        throw UsageError("bad budget '" + s + "'");
    }
}

}  // namespace

std::vector<uint64_t> parse_budgets(const std::string &spec) {
    std::vector<uint64_t> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        size_t dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_power(item));
            continue;
        }
        std::string lo = item.substr(0, dots), hi = item.substr(dots + 2);
        size_t c1 = lo.find('^'), c2 = hi.find('^');
        if (c1 == std::string::npos || c2 == std::string::npos || lo.substr(0, c1) != hi.substr(0, c2)) {
            throw UsageError("ranges must look like 3^1..3^8: '" + item + "'");
        }
        const std::string base = lo.substr(0, c1);
        unsigned long e1, e2;
        try {
            e1 = std::stoul(lo.substr(c1 + 1));
            e2 = std::stoul(hi.substr(c2 + 1));
        } catch (const std::logic_error &) {
            throw UsageError("bad budget range '" + item + "'");
        }
        if (e1 > e2) throw UsageError("empty budget range '" + item + "'");
        for (unsigned long e = e1; e <= e2; ++e) out.push_back(parse_power(base + "^" + std::to_string(e)));
    }
    if (out.empty()) throw UsageError("no budgets given");
    return out;
}

namespace {

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

}  // namespace

void write_csv(std::ostream &os, const std::vector<ResultRow> &rows) {
    os << "budget,trials,mean,stddev,queries,seconds\n";
    for (const auto &r : rows) {
        os << r.budget << ',' << r.trials << ',' << fixed(r.mean, 6) << ',' << fixed(r.stddev, 6) << ','
           << r.queries << ',' << fixed(r.seconds, 3) << '\n';
    }
}

void write_json(std::ostream &os, const std::vector<ResultRow> &rows) {
    json arr = json::array();
    for (const auto &r : rows) {
        arr.push_back({{"budget", r.budget},
                       {"trials", r.trials},
                       {"mean", r.mean},
                       {"stddev", r.stddev},
                       {"queries", r.queries},
                       {"seconds", r.seconds}});
    }
    os << arr.dump(2) << '\n';
}

std::vector<ResultRow> read_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) throw UsageError("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "budget,trials,mean,stddev,queries,seconds") throw UsageError("unexpected CSV header: " + line);
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[6];
        for (auto &x : f)
            if (!std::getline(ss, x, ',')) throw UsageError("short CSV row: " + line);
        try {
            rows.push_back({std::stoull(f[0]), std::stoull(f[1]), std::stod(f[2]), std::stod(f[3]), std::stoull(f[4]),
                            std::stod(f[5])});
        } catch (const std::logic_error &) {
            throw UsageError("bad CSV row: " + line);
        }
    }
    return rows;
}

std::vector<double> run_trials(size_t trials, size_t workers, const std::function<double(size_t, uint64_t &)> &fn,
                               uint64_t &queries) {
    std::vector<double> out(trials, 0.0);
    std::vector<uint64_t> q(trials, 0);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, trials);
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (size_t i = next++; i < trials; i = next++) {
            try {
                out[i] = fn(i, q[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto &t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    queries = std::accumulate(q.begin(), q.end(), uint64_t{0});
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

ResultRow summarize(uint64_t budget, const std::vector<double> &v, uint64_t queries, double seconds) {
    ResultRow r;
    r.budget = budget;
    r.trials = v.size();
    r.queries = queries;
    r.seconds = seconds;
    if (v.empty()) return r;
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return r;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

uint64_t trial_seed(uint64_t seed, uint64_t budget, size_t trial) { return derive_seed(derive_seed(seed, budget), trial); }

}  // namespace

std::vector<ResultRow> run_table1(const std::vector<uint64_t> &budgets, size_t trials, uint64_t seed, unsigned long r,
                                  unsigned label_bits, size_t workers, bool timing) {
    if (!std::is_sorted(budgets.begin(), budgets.end())) throw UsageError("budgets must be ascending");
    if (label_bits == 0) throw UsageError("label width must be positive");
    BigInt n;
    mpz_ui_pow_ui(n.get_mpz_t(), r, label_bits);
    std::vector<ResultRow> rows;
    for (uint64_t q : budgets) {
        if (q < 2) throw UsageError("table1 budgets must be >= 2");
        const auto t0 = Clock::now();
        uint64_t queries = 0;
        auto values = run_trials(trials, workers, [&](size_t trial, uint64_t &used) {
            Rng rng(trial_seed(seed, q, trial));
            HidingOracle o = make_reflection_oracle(GroupCtx(n), uniform_below(n, rng));
            PhaseBackend be(o, rng);
            RadixObjective obj(r, label_bits);
            GreedyResult res = greedy_sieve(be, obj, nullptr, q);
            used = o.queries();
            return static_cast<double>(res.stats.max_alpha);
        }, queries);
        rows.push_back(summarize(q, values, queries, timing ? elapsed(t0) : 0.0));
    }
    return rows;
}

ScalingFit fit_scaling(const std::vector<ResultRow> &rows) {
    if (rows.size() < 3) throw std::domain_error("fit_scaling: need at least 3 rows");
    const double log3_2 = std::log(2.0) / std::log(3.0);
    std::vector<double> x, y;
    for (const auto &r : rows) {
        if (r.budget < 1 || r.mean < 0 || !std::isfinite(r.mean)) throw std::domain_error("fit_scaling: bad row");
        x.push_back(std::sqrt(2.0 * r.mean * log3_2));
        y.push_back(std::log(static_cast<double>(r.budget)) / std::log(3.0));
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 1e-300) throw std::domain_error("fit_scaling: all rows have the same mean");
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        fit.residuals.push_back(y[i] - (fit.slope * x[i] + fit.intercept));
        ssr += fit.residuals.back() * fit.residuals.back();
    }
    const double se = std::sqrt(ssr / (n - 2.0) / sxx);
    boost::math::students_t dist(n - 2.0);
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.slope_ci_low = fit.slope - tq * se;
    fit.slope_ci_high = fit.slope + tq * se;
    return fit;
}

std::vector<ResultRow> simulate(const ExperimentConfig &cfg) {
    cfg.validate();
    std::vector<uint64_t> budgets = cfg.budgets.empty() ? std::vector<uint64_t>{0} : cfg.budgets;
    std::vector<ResultRow> rows;
    for (uint64_t budget : budgets) {
        const auto t0 = Clock::now();
        uint64_t queries = 0;
        uint64_t reported = budget;
        std::function<double(size_t, uint64_t &)> trial_fn;

        if (cfg.algorithm == "staged" || cfg.algorithm == "general") {
            BigInt n = cfg.N;
            if (cfg.algorithm == "staged" || n == 0) {
                n = 1;
                n <<= cfg.n;
            }
            if (n < 2) throw UsageError("N must be >= 2");
            const unsigned m = cfg.algorithm == "staged" ? staged_config(cfg.n).m : interval_depth(n);
            const uint64_t base = initial_list_size(m);
            if (reported == 0) reported = base;
            RecoveryOptions ropts;
            ropts.retry_cap = cfg.retry_cap;
            ropts.budget_scale = static_cast<double>(reported) / static_cast<double>(base);
            const bool staged = cfg.algorithm == "staged";
            const unsigned bits = cfg.n;
            trial_fn = [=](size_t trial, uint64_t &used) {
                Rng rng(trial_seed(cfg.seed, budget, trial));
                const BigInt s = uniform_below(n, rng);
                HidingOracle o = make_reflection_oracle(GroupCtx(n), s);
                double ok = 0;
                try {
                    RecoveryReport rep = staged ? recover_slope_power2(o, bits, rng, ropts)
                                                : recover_slope_general(o, rng, ropts);
                    ok = rep.secret == s ? 1.0 : 0.0;
                } catch (const NoHiddenReflection &) {
                }
                used = o.queries();
                return ok;
            };
        } else if (cfg.algorithm == "greedy") {
            BigInt n;
            mpz_ui_pow_ui(n.get_mpz_t(), cfg.radix, cfg.n);
            if (reported == 0) reported = default_greedy_budget(cfg.radix, cfg.n);
            const uint64_t q = reported;
            const unsigned long r = cfg.radix;
            const unsigned digits = cfg.n;
            trial_fn = [=](size_t trial, uint64_t &used) {
                Rng rng(trial_seed(cfg.seed, budget, trial));
                const BigInt s = uniform_below(n, rng);
                HidingOracle o = make_reflection_oracle(GroupCtx(n), s);
                PhaseBackend be(o, rng);
                double ok = 0;
                try {
                    RadixRecoveryResult res = run_radix_recovery(be, r, digits, q);
                    ok = res.residue == mod(s, BigInt(r)) ? 1.0 : 0.0;
                } catch (const SieveExhausted &) {
                } catch (const InsufficientCopiesError &) {
                }
                used = o.queries();
                return ok;
            };
        } else {
            if (cfg.orders.empty()) throw UsageError("abelian simulation needs --orders");
            AbelianGroupSpec spec{cfg.orders, {}};
            spec.validate();
            AbelianOptions aopts;
            aopts.recovery.retry_cap = cfg.retry_cap;
            aopts.batch_budget = budget;
            trial_fn = [=](size_t trial, uint64_t &used) {
                Rng rng(trial_seed(cfg.seed, budget, trial));
                std::vector<BigInt> s;
                for (const auto &n : spec.orders) s.push_back(uniform_below(n, rng));
                ShiftPair p = make_shift_pair(spec, s);
                HidingOracle o = shift_to_dihedral(p);
                double ok = 0;
                try {
                    AbelianReport rep = solve_abelian_shift(p, o, rng, aopts);
                    ok = rep.shift == s ? 1.0 : 0.0;
                } catch (const NoHiddenReflection &) {
                }
                used = o.queries();
                return ok;
            };
        }
        auto values = run_trials(cfg.trials, cfg.workers, trial_fn, queries);
        rows.push_back(summarize(reported, values, queries, cfg.timing ? elapsed(t0) : 0.0));
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow &a, const ResultRow &b) { return a.budget < b.budget; });
    return rows;
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
}

namespace {

std::string num(double x, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

CheckResult check_label_law(const VerifyOptions &opts) {
    CheckResult c{"label-law", true, "", "max TV <= 0.02"};
    double worst = 0;
    std::string where;
    for (unsigned long n = 1; n <= opts.nmax; ++n) {
        for (unsigned long s = 0; s < n; ++s) {
            Rng rng(derive_seed(opts.seed, (n << 20) | s));
            HidingOracle o = make_reflection_oracle(GroupCtx(BigInt(n)), BigInt(s));
            PhaseBackend be(o, rng, opts.faults);
            std::vector<double> counts(2 * n, 0.0);
            for (uint64_t i = 0; i < opts.samples; ++i) {
                PhaseQubit q = be.sample_phase_qubit();
                const unsigned long k = q.k().get_ui();
                counts[2 * k + (be.measure_pm(q) ? 0 : 1)] += 1;
            }
            const auto law = statevec::label_pm_law(n, s);
            double tv = 0;
            for (size_t i = 0; i < law.size(); ++i) tv += std::fabs(counts[i] / static_cast<double>(opts.samples) - law[i]);
            tv /= 2;
            if (tv > worst) {
                worst = tv;
                where = " at N=" + std::to_string(n) + " s=" + std::to_string(s);
            }
        }
    }
    c.passed = worst <= 0.02;
    c.observed = "max TV " + num(worst) + where;
    return c;
}

CheckResult check_classical_flag(const VerifyOptions &opts) {
    CheckResult c{"classical-flag", true, "", "rate 0.25 within 3 sigma"};
    Rng rng(derive_seed(opts.seed, 101));
    SubstringInstance inst = make_substring_instance(BigInt(8), BigInt(16), BigInt(2));
    HidingOracle o = splice_substring(inst, BigInt(0));
    PhaseBackend be(o, rng, opts.faults);
    double hits = 0;
    for (uint64_t i = 0; i < opts.samples; ++i) hits += be.sample_phase_qubit().classical() ? 1 : 0;
    const double n = static_cast<double>(opts.samples);
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    const double p = hits / n;
    c.passed = std::fabs(p - 0.25) <= 3 * sigma;
    c.observed = "rate " + num(p, 5);
    return c;
}

CheckResult check_coin(const VerifyOptions &opts) {
    CheckResult c{"coin-fairness", true, "", "difference rate 0.5 within 4 sigma"};
    Rng rng(derive_seed(opts.seed, 102));
    HidingOracle o = make_reflection_oracle(GroupCtx(BigInt(16)), BigInt(5));
    PhaseBackend be(o, rng, opts.faults);
    double diff = 0;
    for (uint64_t i = 0; i < opts.samples; ++i) {
        PhaseQubit a = be.sample_phase_qubit();
        PhaseQubit b = be.sample_phase_qubit();
        diff += be.combine(a, b).difference ? 1 : 0;
    }
    const double n = static_cast<double>(opts.samples);
    const double p = diff / n;
    c.passed = std::fabs(p - 0.5) <= 4 * 0.5 / std::sqrt(n);
    c.observed = "difference rate " + num(p, 5);
    return c;
}

CheckResult check_extraction_exact(const VerifyOptions &opts) {
    CheckResult c{"extraction-exact", true, "", "residual fidelity >= 1-1e-10, branch probabilities 1/2"};
    const BigInt n = 8;
    Rng rng(derive_seed(opts.seed, 103));
    double worst = 1.0, worst_p = 0.0;
    for (unsigned long s = 0; s < 8; ++s)
        for (unsigned long k = 0; k < 8; ++k)
            for (unsigned long l = 0; l < 8; ++l) {
                auto br = statevec::extract_branches(BigInt(k), BigInt(l), BigInt(s), n);
                for (int b = 0; b < 2; ++b) {
                    BigInt label = b == 0 ? BigInt(k + l) : BigInt(BigInt(k) - BigInt(l));
                    auto ideal = statevec::phase_qubit_state(mod(label, n), BigInt(s), n);
                    worst = std::min(worst, statevec::fidelity(br.residual[b], ideal));
                    worst_p = std::max(worst_p, std::fabs(br.probability[b] - 0.5));
                }
                auto [outcome, state] = statevec::extract_sim(BigInt(k), BigInt(l), BigInt(s), n, rng);
                BigInt label = outcome == 0 ? BigInt(k + l) : BigInt(BigInt(k) - BigInt(l));
                worst = std::min(worst, statevec::fidelity(state, statevec::phase_qubit_state(mod(label, n), BigInt(s), n)));
            }
    c.passed = worst >= 1 - 1e-10 && worst_p <= 1e-12;
    c.observed = "min fidelity " + num(worst, 15) + ", max |p-1/2| " + num(worst_p);
    return c;
}

CheckResult check_residual(const VerifyOptions &opts) {
    CheckResult c{"residual-fidelity", true, "", "backend +/- law after extraction matches exact residuals"};
    const unsigned long n = 8;
    // Cell: (s, k, l, outcome); expected P(+) from the exact residual state.
    std::vector<double> expect(n * n * n * 2), trials(n * n * n * 2, 0.0), plus(n * n * n * 2, 0.0);
    for (unsigned long s = 0; s < n; ++s)
        for (unsigned long k = 0; k < n; ++k)
            for (unsigned long l = 0; l < n; ++l) {
                auto br = statevec::extract_branches(BigInt(k), BigInt(l), BigInt(s), BigInt(n));
                for (int b = 0; b < 2; ++b) expect[((s * n + k) * n + l) * 2 + b] = statevec::plus_probability(br.residual[b]);
            }
    for (unsigned long s = 0; s < n; ++s) {
        Rng rng(derive_seed(opts.seed, 200 + s));
        HidingOracle o = make_reflection_oracle(GroupCtx(BigInt(n)), BigInt(s));
        PhaseBackend be(o, rng, opts.faults);
        for (uint64_t i = 0; i < opts.samples / n; ++i) {
            PhaseQubit a = be.sample_phase_qubit();
            PhaseQubit b = be.sample_phase_qubit();
            const unsigned long k = a.k().get_ui(), l = b.k().get_ui();
            auto ext = be.combine(a, b);
            const size_t cell = ((s * n + k) * n + l) * 2 + (ext.difference ? 1 : 0);
            trials[cell] += 1;
            plus[cell] += be.measure_pm(ext.qubit) ? 1 : 0;
        }
    }
    double chi2 = 0, dof = 0;
    size_t impossible = 0;
    for (size_t i = 0; i < expect.size(); ++i) {
        if (trials[i] == 0) continue;
        const double p = expect[i];
        if (p < 1e-12 || p > 1 - 1e-12) {
            const double want = p > 0.5 ? trials[i] : 0.0;
            if (plus[i] != want) ++impossible;
            continue;
        }
        chi2 += (plus[i] - trials[i] * p) * (plus[i] - trials[i] * p) / (trials[i] * p * (1 - p));
        dof += 1;
    }
    double crit = 0;
    if (dof > 0) {
        boost::math::chi_squared dist(dof);
        crit = boost::math::quantile(boost::math::complement(dist, 1e-6));
    }
    c.passed = impossible == 0 && chi2 <= crit;
    c.observed = "chi2 " + num(chi2, 6) + " on " + num(dof, 6) + " cells (limit " + num(crit, 6) + "), " +
                 std::to_string(impossible) + " impossible outcomes";
    return c;
}

CheckResult check_cosine(const VerifyOptions &opts) {
    CheckResult c{"cosine-frequency", true, "", "within 3 sigma at 1e4 samples"};
    struct Point {
        unsigned long n, k, s, t;
    };
    const Point grid[] = {{3, 1, 1, 0},    {5, 2, 3, 1},   {8, 1, 3, 0},    {8, 3, 5, 2},
                          {12, 5, 7, 11},  {16, 1, 0, 8},  {16, 7, 9, 4},   {17, 3, 11, 5},
                          {24, 5, 13, 20}, {31, 12, 30, 3}, {32, 1, 17, 0}, {32, 11, 6, 29}};
    const uint64_t per_point = 10000;
    double worst = 0;
    std::string where;
    size_t tested = 0;
    for (const auto &pt : grid) {
        if (pt.n > opts.nmax) continue;
        ++tested;
        Rng rng(derive_seed(opts.seed, 300 + pt.n * 1000 + pt.k));
        HidingOracle o = make_reflection_oracle(GroupCtx(BigInt(pt.n)), BigInt(pt.s));
        PhaseBackend be(o, rng, opts.faults);
        double hits = 0;
        for (uint64_t i = 0; i < per_point;) {
            PhaseQubit q = be.sample_phase_qubit();
            if (q.k() != pt.k) continue;
            hits += be.cosine_observe(q, BigInt(pt.t)) ? 1 : 0;
            ++i;
        }
        const double ang = std::numbers::pi * static_cast<double>(pt.k) *
                           (static_cast<double>(pt.s) - static_cast<double>(pt.t)) / static_cast<double>(pt.n);
        const double p = std::cos(ang) * std::cos(ang);
        const double f = hits / static_cast<double>(per_point);
        const double sigma = std::sqrt(std::max(p * (1 - p), 0.0) / static_cast<double>(per_point));
        const double z = sigma > 0 ? std::fabs(f - p) / sigma : (std::fabs(f - p) > 1e-12 ? 1e9 : 0.0);
        if (z > worst) {
            worst = z;
            where = " at N=" + std::to_string(pt.n) + " k=" + std::to_string(pt.k);
        }
    }
    c.passed = worst <= 3.0;
    c.observed = "max |z| " + num(worst) + where + " over " + std::to_string(tested) + " points";
    return c;
}

CheckResult check_splice(const VerifyOptions &opts) {
    CheckResult c{"splice-trace-norm", true, "", "||rho_spliced - rho_exact||_1 = |s-t|/N within 1e-9"};
    double worst = 0;
    std::string where;
    const unsigned long top = std::min<unsigned long>(opts.nmax, 32);
    for (unsigned long n = 1; n <= top; ++n)
        for (unsigned long s = 0; s < n; ++s)
            for (unsigned long t = 0; t < n; ++t) {
                SubstringInstance inst = make_substring_instance(BigInt(n), BigInt(2 * n), BigInt(s));
                HidingOracle o = splice_substring(inst, BigInt(t));
                const auto spliced = statevec::rho_from_oracle(o);
                const unsigned long u = (s + n - t) % n;
                const auto exact = statevec::rho_coset_mixture(n, u);
                const double want = std::fabs(static_cast<double>(s) - static_cast<double>(t)) / static_cast<double>(n);
                const double err = std::fabs(statevec::trace_norm(spliced, exact) - want);
                if (err > worst) {
                    worst = err;
                    where = " at N=" + std::to_string(n) + " s=" + std::to_string(s) + " t=" + std::to_string(t);
                }
            }
    c.passed = worst <= 1e-9;
    c.observed = "max error " + num(worst) + where;
    return c;
}

}  // namespace

VerifyReport verify_suite(const VerifyOptions &opts) {
    if (opts.nmax < 1 || opts.nmax > 1024) throw UsageError("nmax must be in [1, 1024]");
    if (opts.samples < 1) throw UsageError("samples must be positive");
    VerifyReport r;
    r.checks.push_back(check_label_law(opts));
    r.checks.push_back(check_classical_flag(opts));
    r.checks.push_back(check_coin(opts));
    r.checks.push_back(check_extraction_exact(opts));
    r.checks.push_back(check_residual(opts));
    r.checks.push_back(check_cosine(opts));
    r.checks.push_back(check_splice(opts));
    return r;
}

}  // namespace dhsp
