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

#ifndef DHSP_HARNESS_H
#define DHSP_HARNESS_H

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhsp/bigint.h"
#include "dhsp/phase_state.h"

namespace dhsp {

/// Bad flags or config contents. Maps to exit code 2.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string mode;                   // simulate | table1 | scaling | verify
    std::string algorithm = "staged";   // staged | general | greedy | abelian
    unsigned n = 8;                     // staged: N = 2^n; greedy: digit count
    BigInt N = 0;                       // general (0: derived from n)
    std::vector<BigInt> orders;         // abelian
    unsigned long radix = 2;
    size_t trials = 100;
    std::vector<uint64_t> budgets;      // list sizes; empty means the algorithm default
    uint64_t seed = 1;
    std::string format = "csv";
    std::string out;                    // empty: stdout
    std::string in;                     // scaling input
    size_t retry_cap = 6;
    unsigned label_bits = 96;           // table1 label width
    unsigned long nmax = 32;            // verify
    uint64_t samples = 100000;          // verify
    bool timing = false;                // fill the seconds column
    size_t workers = 0;                 // 0: hardware concurrency

    void validate() const;
};

/// Reads the JSON config format (keys mirror the long flag names).
ExperimentConfig config_from_json(const std::string &text);

/// "3^1..3^8", "81,243", "2^4" etc.
std::vector<uint64_t> parse_budgets(const std::string &spec);

struct ResultRow {
    uint64_t budget = 0;
    size_t trials = 0;
    double mean = 0;
    double stddev = 0;
    uint64_t queries = 0;  // total over all trials
    double seconds = 0;
};

void write_csv(std::ostream &os, const std::vector<ResultRow> &rows);
void write_json(std::ostream &os, const std::vector<ResultRow> &rows);
std::vector<ResultRow> read_csv(std::istream &is);

/// Runs fn(trial) for trial in [0, trials) on a pool; results in trial order.
std::vector<double> run_trials(size_t trials, size_t workers, const std::function<double(size_t, uint64_t &)> &fn,
                               uint64_t &queries);

/// Greedy race on uniform label_bits-digit labels; statistic is the largest alpha reached.
std::vector<ResultRow> run_table1(const std::vector<uint64_t> &budgets, size_t trials, uint64_t seed,
                                  unsigned long r = 2, unsigned label_bits = 96, size_t workers = 0,
                                  bool timing = false);

struct ScalingFit {
    double slope = 0;
    double intercept = 0;
    double slope_ci_low = 0;
    double slope_ci_high = 0;
    std::vector<double> residuals;
};

/// Least squares of log_3 Q against sqrt(2 mean log_3 2); 95% CI on the slope.
ScalingFit fit_scaling(const std::vector<ResultRow> &rows);

/// One row per budget; the statistic is the exact-recovery rate (s mod r for greedy).
std::vector<ResultRow> simulate(const ExperimentConfig &cfg);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string observed;
    std::string expected;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const;
};

struct VerifyOptions {
    unsigned long nmax = 32;
    uint64_t samples = 100000;
    uint64_t seed = 1;
    BackendFaults faults;
};

VerifyReport verify_suite(const VerifyOptions &opts);

}  // namespace dhsp

#endif  // DHSP_HARNESS_H
