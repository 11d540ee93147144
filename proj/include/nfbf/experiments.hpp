// nfbf - near-field wideband hybrid beamfocusing simulator
// Copyright (C) 2026 nfbf contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NFBF_EXPERIMENTS_HPP
#define NFBF_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nfbf/baselines.hpp"
#include "nfbf/config.hpp"

namespace nfbf
{

// One result row of the sweep CSV. Header (fixed):
// sweep_param,sweep_value,scheme,arch,field,realization,seed,
// max_min_rate_bpshz,sum_rate_bpshz,violation,outer_iters,certified,
// wall_ms,status
struct ResultRow
{
    std::string sweep_param = "none";
    double sweep_value = 0.0;
    SchemeSpec spec;
    int realization = 0;
    std::uint64_t seed = 0;
    double max_min_rate = 0.0;
    double sum_rate = 0.0;
    double violation = 0.0;
    int outer_iters = 0;
    bool certified = false;
    double wall_ms = 0.0;
    std::string status = "ok";
};

extern const char *const csv_header;
std::string to_csv(const ResultRow &row);

struct SweepSpec
{
    std::string param;                // config key to sweep, or "none"
    std::vector<double> values;
    std::vector<SchemeSpec> schemes;
};

// Per-realization seed: realization i of a sweep always draws the same
// geometry regardless of the swept value or scheme, so comparisons across
// schemes are paired.
std::uint64_t realization_seed(std::uint64_t master, int realization);

// Applies a swept value to a configuration copy; integer-valued keys are
// checked for integrality. Throws std::invalid_argument on unknown keys.
ScenarioConfig apply_sweep_value(const ScenarioConfig &base, const std::string &param,
                                 double value);

// Runs one realization of a scheme, converting exceptions into rows with a
// non-ok status so sweeps keep going.
ResultRow run_one(const ScenarioConfig &cfg, const SchemeSpec &spec, const std::string &param,
                  double value, int realization);

struct SweepOutcome
{
    std::vector<ResultRow> rows;
    int failed = 0;
};

// Full sweep: every value x scheme x realization, optionally on a worker
// pool. Rows are canonically ordered before writing `rows.csv` and the
// per-cell mean/stderr summary `summary.csv` into out_dir.
SweepOutcome run_sweep(const ScenarioConfig &cfg, const SweepSpec &sweep,
                       const std::string &out_dir, int jobs = 1);

// Writes rows.csv and summary.csv; exposed separately for tests.
void write_sweep_csv(const std::vector<ResultRow> &rows, const std::string &out_dir);

// Single-scenario convergence trace: one row per outer iteration with
// columns iter,rho,violation,R_r,wall_ms written to out_dir/trace.csv.
struct TraceOutcome
{
    std::vector<double> violation, objective;
    bool certified = false;
};
TraceOutcome run_convergence(const ScenarioConfig &cfg, const SchemeSpec &spec,
                             const std::string &out_dir);

// Command-line entry point (exposed for in-process testing):
// solve | sweep | converge, see the README for the grammar. Returns 0 on
// success, 1 if any realization failed, 2 on configuration errors.
int cli_main(int argc, const char *const *argv);

} // namespace nfbf

#endif
