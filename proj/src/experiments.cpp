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

#include "nfbf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "nfbf/rng.hpp"

namespace nfbf
{

const char *const csv_header =
    "sweep_param,sweep_value,scheme,arch,field,realization,seed,max_min_rate_bpshz,"
    "sum_rate_bpshz,violation,outer_iters,certified,wall_ms,status";

namespace
{

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_ms(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

std::string sanitize(const std::string &s)
{
    std::string out = s;
    for (char &c : out)
        if (c == ',' || c == '\n' || c == '\r')
            c = ';';
    return out;
}

} // namespace

std::string to_csv(const ResultRow &row)
{
    std::ostringstream os;
    os << row.sweep_param << ',' << fmt(row.sweep_value) << ',' << to_string(row.spec.access)
       << ',' << to_string(row.spec.arch) << ',' << to_string(row.spec.field) << ','
       << row.realization << ',' << row.seed << ',' << fmt(row.max_min_rate) << ','
       << fmt(row.sum_rate) << ',' << fmt(row.violation) << ',' << row.outer_iters << ','
       << (row.certified ? 1 : 0) << ',' << fmt_ms(row.wall_ms) << ',' << row.status;
    return os.str();
}

std::uint64_t realization_seed(std::uint64_t master, int realization)
{
    return derive_seed(master, std::uint64_t(realization));
}

ScenarioConfig apply_sweep_value(const ScenarioConfig &base, const std::string &param,
                                 double value)
{
    ScenarioConfig cfg = base;
    if (param == "none")
        return cfg;
    apply_config_value(cfg, param, fmt(value));
    return cfg;
}

ResultRow run_one(const ScenarioConfig &cfg, const SchemeSpec &spec, const std::string &param,
                  double value, int realization)
{
    ResultRow row;
    row.sweep_param = param;
    row.sweep_value = value;
    row.spec = spec;
    row.realization = realization;
    row.seed = realization_seed(cfg.seed, realization);
    try
    {
        ScenarioConfig c = apply_sweep_value(cfg, param, value);
        c.validate();
        auto t0 = std::chrono::steady_clock::now();
        SolveResult res = solve_scheme(c, spec, row.seed);
        row.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        row.max_min_rate = res.max_min_rate;
        row.sum_rate = res.sum_rate;
        row.violation = res.violation;
        row.outer_iters = res.penalty.outer_iter;
        row.certified = res.certified;
    }
    catch (const std::exception &e)
    {
        row.status = "error: " + sanitize(e.what());
    }
    return row;
}

SweepOutcome run_sweep(const ScenarioConfig &cfg, const SweepSpec &sweep,
                       const std::string &out_dir, int jobs)
{
    struct Task
    {
        double value = 0.0;
        SchemeSpec spec;
        int realization = 0;
    };
    std::vector<double> values = sweep.values;
    if (sweep.param == "none" || values.empty())
        values = {0.0};
    if (sweep.schemes.empty())
        throw std::invalid_argument("run_sweep: no schemes requested");

    std::vector<Task> tasks;
    for (double v : values)
        for (const SchemeSpec &s : sweep.schemes)
            for (int i = 0; i < cfg.realizations; ++i)
                tasks.push_back({v, s, i});

    // Rows land at their task index, so the output order (and the file
    // bytes) never depend on worker scheduling.
    SweepOutcome out;
    out.rows.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;)
        {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            out.rows[i] =
                run_one(cfg, tasks[i].spec, sweep.param, tasks[i].value, tasks[i].realization);
        }
    };
    int n = std::max(1, jobs);
    if (n == 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }

    for (const ResultRow &row : out.rows)
        if (row.status != "ok")
            ++out.failed;
    write_sweep_csv(out.rows, out_dir);
    return out;
}

void write_sweep_csv(const std::vector<ResultRow> &rows, const std::string &out_dir)
{
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir + "/rows.csv");
        if (!f)
            throw std::runtime_error("write_sweep_csv: cannot write " + out_dir + "/rows.csv");
        f << csv_header << '\n';
        for (const ResultRow &row : rows)
            f << to_csv(row) << '\n';
    }

    // Per-cell summary over ok rows, cells in first-appearance order.
    struct Cell
    {
        std::string key;
        int n = 0;
        double mm_sum = 0, mm_sq = 0, sr_sum = 0, sr_sq = 0;
    };
    std::vector<Cell> cells;
    std::map<std::string, std::size_t> index;
    for (const ResultRow &row : rows)
    {
        if (row.status != "ok")
            continue;
        std::string key = row.sweep_param + ',' + fmt(row.sweep_value) + ',' +
                          to_string(row.spec.access) + ',' + to_string(row.spec.arch) + ',' +
                          to_string(row.spec.field);
        auto it = index.find(key);
        if (it == index.end())
        {
            it = index.emplace(key, cells.size()).first;
            cells.push_back({key, 0, 0, 0, 0, 0});
        }
        Cell &c = cells[it->second];
        ++c.n;
        c.mm_sum += row.max_min_rate;
        c.mm_sq += row.max_min_rate * row.max_min_rate;
        c.sr_sum += row.sum_rate;
        c.sr_sq += row.sum_rate * row.sum_rate;
    }

    std::ofstream f(out_dir + "/summary.csv");
    if (!f)
        throw std::runtime_error("write_sweep_csv: cannot write " + out_dir + "/summary.csv");
    f << "sweep_param,sweep_value,scheme,arch,field,n,max_min_rate_mean,max_min_rate_stderr,"
         "sum_rate_mean,sum_rate_stderr\n";
    for (const Cell &c : cells)
    {
        auto stats = [&](double sum, double sq) {
            double mean = sum / c.n;
            double var = c.n > 1 ? std::max(0.0, (sq - sum * mean) / (c.n - 1)) : 0.0;
            return std::pair<double, double>(mean, std::sqrt(var / c.n));
        };
        auto [mm_mean, mm_se] = stats(c.mm_sum, c.mm_sq);
        auto [sr_mean, sr_se] = stats(c.sr_sum, c.sr_sq);
        f << c.key << ',' << c.n << ',' << fmt(mm_mean) << ',' << fmt(mm_se) << ','
          << fmt(sr_mean) << ',' << fmt(sr_se) << '\n';
    }
}

TraceOutcome run_convergence(const ScenarioConfig &cfg, const SchemeSpec &spec,
                             const std::string &out_dir)
{
    SolveResult res = solve_scheme(cfg, spec, realization_seed(cfg.seed, 0));

    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir + "/trace.csv");
    if (!f)
        throw std::runtime_error("run_convergence: cannot write " + out_dir + "/trace.csv");
    f << "iter,rho,violation,R_r,wall_ms\n";
    const PenaltyState &ps = res.penalty;
    for (std::size_t i = 0; i < ps.objective_history.size(); ++i)
    {
        double rho = ps.rho > 0.0 ? cfg.rho0 * std::pow(ps.alpha, double(i)) : 0.0;
        double viol = i < ps.violation_history.size() ? ps.violation_history[i] : 0.0;
        double wall = i < ps.wall_ms_history.size() ? ps.wall_ms_history[i] : 0.0;
        f << (i + 1) << ',' << fmt(rho) << ',' << fmt(viol) << ','
          << fmt(ps.objective_history[i]) << ',' << fmt_ms(wall) << '\n';
    }

    TraceOutcome out;
    out.violation = ps.violation_history;
    out.objective = ps.objective_history;
    out.certified = res.certified;
    return out;
}

namespace
{

SchemeSpec parse_scheme_token(const std::string &token)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : token)
    {
        if (c == ':')
        {
            parts.push_back(cur);
            cur.clear();
        }
        else
            cur += c;
    }
    parts.push_back(cur);
    if (parts.size() < 2 || parts.size() > 4)
        throw std::invalid_argument("scheme: expected access:arch[:field[:scorefar]], got '" +
                                    token + "'");

    SchemeSpec spec;
    if (parts[0] == "rsma")
        spec.access = Access::rsma;
    else if (parts[0] == "sdma")
        spec.access = Access::sdma;
    else
        throw std::invalid_argument("scheme: unknown access '" + parts[0] + "'");

    if (parts[1] == "fdb")
        spec.arch = SchemeArch::fdb;
    else if (parts[1] == "fhb")
        spec.arch = SchemeArch::fhb;
    else if (parts[1] == "shb")
        spec.arch = SchemeArch::shb;
    else if (parts[1] == "ps")
        spec.arch = SchemeArch::ps;
    else
        throw std::invalid_argument("scheme: unknown architecture '" + parts[1] + "'");

    if (parts.size() >= 3)
    {
        if (parts[2] == "near")
            spec.field = FieldModel::near;
        else if (parts[2] == "far")
            spec.field = FieldModel::far;
        else
            throw std::invalid_argument("scheme: unknown field model '" + parts[2] + "'");
    }
    if (parts.size() == 4)
    {
        if (parts[3] != "scorefar")
            throw std::invalid_argument("scheme: unknown modifier '" + parts[3] + "'");
        if (spec.field != FieldModel::far)
            throw std::invalid_argument("scheme: scorefar requires the far field model");
        spec.score_on_far = true;
    }
    return spec;
}

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s)
    {
        if (c == ',')
        {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        }
        else
            cur += c;
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

} // namespace

int cli_main(int argc, const char *const *argv)
{
    CLI::App app{"near-field wideband TTD hybrid beamfocusing simulator"};
    app.require_subcommand(1);
    // Global options may appear before or after the subcommand name.
    app.fallthrough();

    std::string profile = "paper";
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = "out";
    int jobs = 1;
    std::uint64_t seed = 0;
    int realizations = 0;
    app.add_option("--profile", profile, "base parameter profile")
        ->check(CLI::IsMember({"paper", "desk"}));
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--set", sets, "override one key=value; repeatable");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads for sweeps")->capture_default_str();
    CLI::Option *seed_opt = app.add_option("--seed", seed, "master seed override");
    CLI::Option *realizations_opt =
        app.add_option("--realizations", realizations, "realization count override");

    std::string scheme = "rsma", arch = "fhb", field = "near";
    bool score_far = false;
    int realization = 0;
    auto add_scheme_opts = [&](CLI::App *cmd) {
        cmd->add_option("--scheme", scheme, "rsma or sdma")
            ->check(CLI::IsMember({"rsma", "sdma"}));
        cmd->add_option("--arch", arch, "fdb, fhb, shb or ps")
            ->check(CLI::IsMember({"fdb", "fhb", "shb", "ps"}));
        cmd->add_option("--field", field, "near (spherical) or far (planar) design model")
            ->check(CLI::IsMember({"near", "far"}));
        cmd->add_flag("--score-on-far", score_far,
                      "score a far-field design on the planar channels too");
    };

    CLI::App *solve = app.add_subcommand("solve", "run one scheme on one realization");
    add_scheme_opts(solve);
    solve->add_option("--realization", realization, "realization index")
        ->capture_default_str();

    CLI::App *sweep = app.add_subcommand("sweep", "sweep one config key over schemes");
    std::string param = "none", values_str, schemes_str;
    sweep->add_option("--param", param, "config key to sweep, or none")
        ->capture_default_str();
    sweep->add_option("--values", values_str, "comma-separated sweep values");
    sweep->add_option("--schemes", schemes_str,
                      "comma-separated access:arch[:field[:scorefar]] list");

    CLI::App *conv = app.add_subcommand("converge", "write the outer-iteration trace");
    add_scheme_opts(conv);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 2;
    }

    ScenarioConfig cfg;
    SchemeSpec spec;
    SweepSpec sw;
    try
    {
        cfg = profile == "desk" ? desk_profile() : paper_profile();
        if (!config_path.empty())
            cfg = parse_config(config_path, cfg);
        for (const std::string &kv : sets)
        {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
            apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed_opt->count() > 0)
            cfg.seed = seed;
        if (realizations_opt->count() > 0)
            cfg.realizations = realizations;
        cfg.validate();

        std::string token = scheme + ':' + arch + ':' + field;
        if (score_far)
            token += ":scorefar";
        spec = parse_scheme_token(token);

        if (sweep->parsed())
        {
            sw.param = param;
            for (const std::string &v : split_list(values_str))
            {
                std::size_t pos = 0;
                sw.values.push_back(std::stod(v, &pos));
                if (pos != v.size())
                    throw std::invalid_argument("--values: bad number '" + v + "'");
            }
            if (sw.param != "none" && sw.values.empty())
                throw std::invalid_argument("--param requires --values");
            std::string list = schemes_str.empty()
                                   ? "rsma:fdb,rsma:fhb,rsma:shb,rsma:ps,sdma:fhb,rsma:fhb:far"
                                   : schemes_str;
            for (const std::string &t : split_list(list))
                sw.schemes.push_back(parse_scheme_token(t));
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "nfbf: " << e.what() << '\n';
        return 2;
    }

    try
    {
        if (solve->parsed())
        {
            ResultRow row = run_one(cfg, spec, "none", 0.0, realization);
            std::cout << csv_header << '\n' << to_csv(row) << '\n';
            return row.status == "ok" ? 0 : 1;
        }
        if (sweep->parsed())
        {
            SweepOutcome out = run_sweep(cfg, sw, out_dir, jobs);
            std::cout << "wrote " << out_dir << "/rows.csv and summary.csv ("
                      << out.rows.size() << " rows, " << out.failed << " failed)\n";
            return out.failed > 0 ? 1 : 0;
        }
        TraceOutcome tr = run_convergence(cfg, spec, out_dir);
        std::cout << "wrote " << out_dir << "/trace.csv (" << tr.objective.size()
                  << " outer iterations";
        if (!tr.violation.empty())
            std::cout << ", final violation " << fmt(tr.violation.back());
        if (!tr.objective.empty())
            std::cout << ", final R_r " << fmt(tr.objective.back());
        std::cout << ", certified " << (tr.certified ? 1 : 0) << ")\n";
        return 0;
    }
    catch (const std::exception &e)
    {
        std::cerr << "nfbf: " << e.what() << '\n';
        return 1;
    }
}

} // namespace nfbf
