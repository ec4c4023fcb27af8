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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "dhsp/harness.h"

using namespace dhsp;

namespace {

std::string csv(const std::vector<ResultRow> &rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

std::vector<ResultRow> rows_from_means(const std::vector<std::pair<uint64_t, double>> &pts) {
    std::vector<ResultRow> rows;
    for (auto [q, m] : pts) {
        ResultRow r;
        r.budget = q;
        r.trials = 100;
        r.mean = m;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("parse_budgets") {
    CHECK(parse_budgets("3^1..3^4") == std::vector<uint64_t>{3, 9, 27, 81});
    CHECK(parse_budgets("2^4") == std::vector<uint64_t>{16});
    CHECK(parse_budgets("81,243") == std::vector<uint64_t>{81, 243});
    CHECK(parse_budgets("1536") == std::vector<uint64_t>{1536});
    CHECK_THROWS_AS(parse_budgets("3^x"), UsageError);
    CHECK_THROWS_AS(parse_budgets(""), UsageError);
}

TEST_CASE("CSV and JSON output") {
    std::vector<ResultRow> rows = {{3, 100, 3.5, 1.25, 300, 0.0}, {9, 100, 6.75, 2.0, 900, 1.5}};
    std::string text = csv(rows);
    CHECK(text.rfind("budget,trials,mean,stddev,queries,seconds\n", 0) == 0);
    std::istringstream is(text);
    auto back = read_csv(is);
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(back[i].budget == rows[i].budget);
        CHECK(back[i].trials == rows[i].trials);
        CHECK(back[i].mean == doctest::Approx(rows[i].mean));
        CHECK(back[i].stddev == doctest::Approx(rows[i].stddev));
        CHECK(back[i].queries == rows[i].queries);
        CHECK(back[i].seconds == doctest::Approx(rows[i].seconds));
    }
    std::ostringstream js;
    write_json(js, rows);
    auto j = nlohmann::json::parse(js.str());
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[1]["budget"] == 9);
    CHECK(j[1]["mean"].get<double>() == doctest::Approx(6.75));
    for (const char *key : {"budget", "trials", "mean", "stddev", "queries", "seconds"}) CHECK(j[0].contains(key));
}

TEST_CASE("config_from_json") {
    auto cfg = config_from_json(R"({"algorithm": "general", "N": "360", "trials": 7, "retry-cap": 3, "budgets": "3^1..3^2"})");
    CHECK(cfg.algorithm == "general");
    CHECK(cfg.N == 360);
    CHECK(cfg.trials == 7);
    CHECK(cfg.retry_cap == 3);
    CHECK(cfg.budgets == std::vector<uint64_t>{3, 9});
    CHECK_THROWS_AS(config_from_json(R"({"bogus": 1})"), UsageError);
    CHECK_THROWS_AS(config_from_json("[1, 2]"), UsageError);
    CHECK_THROWS_AS(config_from_json("{"), UsageError);
    ExperimentConfig bad;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("table1 rows") {
    SUBCASE("budget 2 is a single combine") {
        auto rows = run_table1({2}, 50, 3);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].mean >= 0);
        CHECK(rows[0].mean <= 96);
        CHECK(rows[0].stddev >= 0);
        CHECK(rows[0].queries == 2 * 50);
    }
    SUBCASE("small budgets near the published means") {
        auto rows = run_table1({3, 81}, 100, 1);
        CHECK(std::abs(rows[0].mean - 3.62) <= 0.25 * 3.62);
        CHECK(std::abs(rows[1].mean - 19.07) <= 0.15 * 19.07);
        CHECK(rows[1].queries == 81 * 100);
    }
    SUBCASE("budgets must ascend") { CHECK_THROWS_AS(run_table1({9, 3}, 10, 1), UsageError); }
}

TEST_CASE("determinism") {
    CHECK(csv(run_table1({3, 27}, 40, 11, 2, 96, 1)) == csv(run_table1({3, 27}, 40, 11, 2, 96, 4)));
    CHECK(csv(run_table1({27}, 40, 11)) != csv(run_table1({27}, 40, 12)));
    ExperimentConfig cfg;
    cfg.mode = "simulate";
    cfg.algorithm = "staged";
    cfg.n = 6;
    cfg.trials = 8;
    cfg.seed = 5;
    auto a = simulate(cfg);
    cfg.workers = 3;
    auto b = simulate(cfg);
    CHECK(csv(a) == csv(b));
    REQUIRE(a.size() == 1);
    CHECK(a[0].mean == doctest::Approx(1.0));
    CHECK(a[0].queries > 0);
}

TEST_CASE("fit_scaling") {
    SUBCASE("published rows 3^5..3^8") {
        auto fit = fit_scaling(rows_from_means({{243, 27.14}, {729, 36.44}, {2187, 47.51}, {6561, 59.76}}));
        CHECK(fit.slope >= 0.8);
        CHECK(fit.slope <= 1.2);
        CHECK(fit.slope_ci_low <= fit.slope);
        CHECK(fit.slope_ci_high >= fit.slope);
        CHECK(fit.residuals.size() == 4);
    }
    SUBCASE("exact law") {
        const double l32 = std::log(2.0) / std::log(3.0);
        std::vector<std::pair<uint64_t, double>> pts;
        for (int e = 2; e <= 9; ++e) pts.push_back({static_cast<uint64_t>(std::pow(3, e)), e * e / (2 * l32)});
        auto fit = fit_scaling(rows_from_means(pts));
        CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(fit.intercept) < 1e-6);
    }
    SUBCASE("degenerate") {
        CHECK_THROWS_AS(fit_scaling(rows_from_means({{3, 1.0}, {9, 2.0}})), std::domain_error);
        CHECK_THROWS_AS(fit_scaling(rows_from_means({{3, 1.0}, {3, 1.0}, {3, 1.0}})), std::domain_error);
    }
}

TEST_CASE("verify_suite") {
    VerifyOptions vo;
    vo.nmax = 12;
    vo.samples = 100000;
    auto rep = verify_suite(vo);
    for (const auto &c : rep.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.observed);
    CHECK(rep.passed());

    auto failed = [](const VerifyReport &r, const std::string &name) {
        for (const auto &c : r.checks)
            if (c.name == name) return !c.passed;
        return false;
    };
    VerifyOptions biased = vo;
    biased.samples = 20000;
    biased.faults.sum_probability = 0.6;
    auto rb = verify_suite(biased);
    CHECK_FALSE(rb.passed());
    CHECK(failed(rb, "coin-fairness"));

    VerifyOptions flipped = vo;
    flipped.samples = 20000;
    flipped.faults.phase_sign_flip = true;
    auto rf = verify_suite(flipped);
    CHECK_FALSE(rf.passed());
    CHECK(failed(rf, "residual-fidelity"));
}

namespace {

struct Cli {
    int code;
    std::string out;
};

Cli run_cli(const std::string &args) {
    auto out_path = std::filesystem::temp_directory_path() / "dhsp_cli_stdout.txt";
    std::string cmd = std::string(DHSP_CLI_PATH) + " " + args + " > " + out_path.string() + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::filesystem::path write_temp(const std::string &name, const std::string &text) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("cli exit codes") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("simulate --format xml").code == 2);
    CHECK(run_cli("simulate --algorithm quantum").code == 2);
    CHECK(run_cli("simulate --trials 0").code == 2);
    CHECK(run_cli("table1 --budgets 9,3 --trials 2").code == 2);
    CHECK(run_cli("scaling").code == 2);
    CHECK(run_cli("--config /nonexistent/cfg.json simulate").code == 2);

    auto ok = run_cli("simulate --algorithm staged --n 5 --trials 4 --seed 3");
    CHECK(ok.code == 0);
    CHECK(ok.out.rfind("budget,trials,mean,stddev,queries,seconds\n", 0) == 0);

    CHECK(run_cli("verify --nmax 8 --samples 20000 --fault-combine-bias 0.6").code == 1);
    CHECK(run_cli("verify --nmax 8 --samples 100000").code == 0);

    auto degenerate = write_temp("dhsp_degenerate.csv", "budget,trials,mean,stddev,queries,seconds\n3,1,1.0,0,3,0\n9,1,2.0,0,9,0\n");
    CHECK(run_cli("scaling --in " + degenerate.string()).code == 1);
}

TEST_CASE("cli table1 is reproducible and json is an array") {
    auto a = run_cli("table1 --budgets 3^1..3^3 --trials 20 --seed 7");
    auto b = run_cli("table1 --budgets 3^1..3^3 --trials 20 --seed 7 --workers 2");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto out_file = std::filesystem::temp_directory_path() / "dhsp_t1.json";
    std::filesystem::remove(out_file);
    CHECK(run_cli("table1 --budgets 3^1..3^2 --trials 5 --format json --out " + out_file.string()).code == 0);
    std::ifstream in(out_file);
    auto j = nlohmann::json::parse(in);
    REQUIRE(j.is_array());
    CHECK(j.size() == 2);
    CHECK(j[0]["budget"] == 3);
}

TEST_CASE("cli flags override the config file") {
    auto cfg = write_temp("dhsp_cfg.json", R"({"algorithm": "staged", "n": 5, "trials": 2, "seed": 9})");
    auto from_file = run_cli("--config " + cfg.string() + " simulate");
    REQUIRE(from_file.code == 0);
    std::istringstream f1(from_file.out);
    auto rows1 = read_csv(f1);
    REQUIRE(rows1.size() == 1);
    CHECK(rows1[0].trials == 2);

    auto overridden = run_cli("--config " + cfg.string() + " simulate --trials 3");
    REQUIRE(overridden.code == 0);
    std::istringstream f2(overridden.out);
    auto rows2 = read_csv(f2);
    REQUIRE(rows2.size() == 1);
    CHECK(rows2[0].trials == 3);

    auto bad = write_temp("dhsp_bad_cfg.json", R"({"trails": 2})");
    CHECK(run_cli("--config " + bad.string() + " simulate").code == 2);
}

TEST_CASE("cli scaling reads table1 output") {
    auto rows = write_temp("dhsp_rows.csv",
                           "budget,trials,mean,stddev,queries,seconds\n243,100,27.14,0,0,0\n729,100,36.44,0,0,0\n"
                           "2187,100,47.51,0,0,0\n6561,100,59.76,0,0,0\n");
    auto r = run_cli("scaling --in " + rows.string() + " --format json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["slope"].get<double>() >= 0.8);
    CHECK(j["slope"].get<double>() <= 1.2);
}
