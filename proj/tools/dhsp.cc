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

// dhsp: experiment runner. Exit codes: 0 ok, 1 check failure, 2 usage error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhsp/harness.h"

namespace {

using namespace dhsp;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Flags {
    std::string config;
    std::string algorithm, format, out, in, budgets, orders, N;
    unsigned n = 0, label_bits = 0;
    unsigned long radix = 0, nmax = 0;
    size_t trials = 0, retry_cap = 0, workers = 0;
    uint64_t seed = 0, samples = 0;
    bool timing = false;
    double combine_bias = 0.5;
    bool sign_flip = false;
};

std::vector<BigInt> parse_orders(const std::string &s) {
    std::vector<BigInt> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.emplace_back(item);
        } catch (const std::invalid_argument &) {
            throw UsageError("bad order '" + item + "'");
        }
        if (out.back() < 1) throw UsageError("orders must be positive");
    }
    if (out.empty()) throw UsageError("no orders given");
    return out;
}

ExperimentConfig load_config(const Flags &f, const CLI::App &sub) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw UsageError("cannot read config file " + f.config);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = config_from_json(ss.str());
    }
    auto given = [&](const char *name) {
        auto *opt = sub.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--algorithm")) cfg.algorithm = f.algorithm;
    if (given("--n")) cfg.n = f.n;
    if (given("--N")) {
        try {
            cfg.N = BigInt(f.N);
        } catch (const std::invalid_argument &) {
            throw UsageError("bad --N value");
        }
    }
    if (given("--orders")) cfg.orders = parse_orders(f.orders);
    if (given("--radix")) cfg.radix = f.radix;
    if (given("--trials")) cfg.trials = f.trials;
    if (given("--budget")) cfg.budgets = parse_budgets(f.budgets);
    if (given("--budgets")) cfg.budgets = parse_budgets(f.budgets);
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--out")) cfg.out = f.out;
    if (given("--in")) cfg.in = f.in;
    if (given("--format")) cfg.format = f.format;
    if (given("--retry-cap")) cfg.retry_cap = f.retry_cap;
    if (given("--label-bits")) cfg.label_bits = f.label_bits;
    if (given("--nmax")) cfg.nmax = f.nmax;
    if (given("--samples")) cfg.samples = f.samples;
    if (given("--workers")) cfg.workers = f.workers;
    if (given("--timing")) cfg.timing = f.timing;
    return cfg;
}

void emit(const ExperimentConfig &cfg, const std::vector<ResultRow> &rows) {
    std::ofstream file;
    std::ostream *os = &std::cout;
    if (!cfg.out.empty()) {
        file.open(cfg.out);
        if (!file) throw UsageError("cannot write " + cfg.out);
        os = &file;
    }
    if (cfg.format == "json") write_json(*os, rows);
    else write_csv(*os, rows);
}

int run_scaling(const ExperimentConfig &cfg) {
    if (cfg.in.empty()) throw UsageError("scaling needs --in");
    std::ifstream in(cfg.in);
    if (!in) throw UsageError("cannot read " + cfg.in);
    ScalingFit fit;
    try {
        fit = fit_scaling(read_csv(in));
    } catch (const std::domain_error &e) {
        std::cerr << e.what() << '\n';
        return kCheckFailed;
    }
    if (cfg.format == "json") {
        nlohmann::json j{{"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"slope_ci", {fit.slope_ci_low, fit.slope_ci_high}},
                         {"residuals", fit.residuals}};
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "slope " << fit.slope << " (95% CI " << fit.slope_ci_low << " .. " << fit.slope_ci_high << ")\n"
                  << "intercept " << fit.intercept << "\nresiduals";
        for (double r : fit.residuals) std::cout << ' ' << r;
        std::cout << '\n';
    }
    return kOk;
}

int run_verify(const ExperimentConfig &cfg, const Flags &f) {
    VerifyOptions vo;
    vo.nmax = cfg.nmax;
    vo.samples = cfg.samples;
    vo.seed = cfg.seed;
    vo.faults.sum_probability = f.combine_bias;
    vo.faults.phase_sign_flip = f.sign_flip;
    VerifyReport rep = verify_suite(vo);
    for (const auto &c : rep.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.observed;
        if (!c.passed) std::cout << " (expected " << c.expected << ")";
        std::cout << '\n';
    }
    return rep.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Dihedral hidden subgroup sieve simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON file with defaults; flags override it")->check(CLI::ExistingFile);

    auto *sim = app.add_subcommand("simulate", "Recover hidden slopes or shifts over many trials");
    sim->add_option("--algorithm", f.algorithm)->check(CLI::IsMember({"staged", "general", "greedy", "abelian"}));
    sim->add_option("--n", f.n, "log2 N for staged, digit count for greedy");
    sim->add_option("--N", f.N, "modulus for general");
    sim->add_option("--orders", f.orders, "comma-separated cyclic orders for abelian");
    sim->add_option("--radix", f.radix);
    sim->add_option("--trials", f.trials);
    sim->add_option("--budget", f.budgets, "list size(s), e.g. 1536 or 2^9..2^12");
    sim->add_option("--seed", f.seed);
    sim->add_option("--out", f.out);
    sim->add_option("--format", f.format)->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--retry-cap", f.retry_cap);
    sim->add_option("--workers", f.workers);
    sim->add_flag("--timing", f.timing, "fill the seconds column (breaks byte-identical output)");

    auto *t1 = app.add_subcommand("table1", "Greedy cancellation race over budgets");
    t1->add_option("--budgets", f.budgets, "default 3^1..3^8");
    t1->add_option("--trials", f.trials);
    t1->add_option("--seed", f.seed);
    t1->add_option("--out", f.out);
    t1->add_option("--format", f.format)->check(CLI::IsMember({"csv", "json"}));
    t1->add_option("--radix", f.radix);
    t1->add_option("--label-bits", f.label_bits);
    t1->add_option("--workers", f.workers);
    t1->add_flag("--timing", f.timing);

    auto *sc = app.add_subcommand("scaling", "Fit log3 Q against sqrt(2 mean log3 2)");
    sc->add_option("--in", f.in, "CSV produced by table1");
    sc->add_option("--format", f.format)->check(CLI::IsMember({"csv", "json"}));

    auto *ver = app.add_subcommand("verify", "Statistical checks of the phase backend against exact simulation");
    ver->add_option("--nmax", f.nmax);
    ver->add_option("--samples", f.samples);
    ver->add_option("--seed", f.seed);
    ver->add_option("--fault-combine-bias", f.combine_bias, "probability of the sum branch (fault injection)");
    ver->add_flag("--fault-phase-sign-flip", f.sign_flip, "carry the other extraction branch (fault injection)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (sim->parsed()) {
            ExperimentConfig cfg = load_config(f, *sim);
            emit(cfg, simulate(cfg));
            return kOk;
        }
        if (t1->parsed()) {
            ExperimentConfig cfg = load_config(f, *t1);
            if (cfg.budgets.empty()) cfg.budgets = parse_budgets("3^1..3^8");
            cfg.validate();
            emit(cfg, run_table1(cfg.budgets, cfg.trials, cfg.seed, cfg.radix, cfg.label_bits, cfg.workers, cfg.timing));
            return kOk;
        }
        if (sc->parsed()) return run_scaling(load_config(f, *sc));
        if (ver->parsed()) {
            ExperimentConfig cfg = load_config(f, *ver);
            if (f.combine_bias < 0 || f.combine_bias > 1) throw UsageError("--fault-combine-bias must be in [0, 1]");
            return run_verify(cfg, f);
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCheckFailed;
    }
    return kUsage;
}
