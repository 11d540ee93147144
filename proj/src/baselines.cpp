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

#include "nfbf/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "nfbf/rng.hpp"

namespace nfbf
{

const char *to_string(SchemeArch a)
{
    switch (a)
    {
    case SchemeArch::fdb: return "fdb";
    case SchemeArch::fhb: return "fhb";
    case SchemeArch::shb: return "shb";
    case SchemeArch::ps: return "ps";
    }
    return "?";
}

const char *to_string(Access a)
{
    return a == Access::rsma ? "rsma" : "sdma";
}

const char *to_string(FieldModel f)
{
    return f == FieldModel::near ? "near" : "far";
}

// Re-evaluates fixed physical precoders on a (possibly different) channel
// set and refreshes the report, allocation and headline rates in place.
static void rescore(SolveResult &res, const ChannelSet &H, double noise_mw,
                    bool include_common, const QcqpOptions &solver)
{
    RateReport rep = received_powers(H, res.precoders, noise_mw);
    rates_from_powers(rep);
    RateAllocation alloc;
    if (include_common)
        alloc = allocate_common_rates(rep.common_cap, rep.Rp, solver);
    else
    {
        alloc.C = Eigen::MatrixXd::Zero(H.users(), H.subcarriers());
        alloc.r_common = rep.Rp.rowwise().sum().minCoeff();
    }
    attach_allocation(rep, alloc);
    res.report = rep;
    res.alloc = alloc;
    res.max_min_rate = rep.min_rate;
    res.sum_rate = rep.sum_rate;
}

SolveResult solve_fdb(const ChannelSet &H, const ScenarioConfig &cfg, bool include_common,
                      std::uint64_t init_seed)
{
    (void)init_seed; // matched-filter start is deterministic
    const int K = H.users();
    const int M = H.subcarriers();
    const double noise = cfg.noise_mw();
    const double p_th = cfg.power_mw();

    DigitalEquivalent init;
    init.P.reserve(M);
    for (int m = 0; m < M; ++m)
    {
        Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(H.antennas(), K + 1);
        if (include_common)
            P.col(0) = H.channels[m].rowwise().mean();
        P.rightCols(K) = H.channels[m];
        P *= std::sqrt(p_th / P.squaredNorm());
        init.P.push_back(std::move(P));
    }

    DigitalOptions dopt;
    dopt.rho_inv = 0.0;
    dopt.p_th_mw = p_th;
    dopt.xi1 = cfg.xi1;
    dopt.max_iters = cfg.mm_max_iters;
    dopt.include_common = include_common;
    dopt.solver.tol = cfg.solver_tol;

    DigitalResult dres = optimize_digital(H, nullptr, init, noise, dopt);

    SolveResult res;
    res.precoders = dres.P;
    for (int m = 0; m < M; ++m)
    {
        double pw = res.precoders.P[m].squaredNorm();
        if (pw > p_th && pw > 0.0)
            res.precoders.P[m] *= std::sqrt(p_th / pw);
    }
    rescore(res, H, noise, include_common, dopt.solver);
    res.certified = dres.certified;
    res.penalty.rho = 0.0;
    res.penalty.alpha = cfg.alpha;
    res.penalty.objective_history = dres.trace;
    res.penalty.violation_history.assign(dres.trace.size(), 0.0);
    res.penalty.outer_iter = dres.iters;
    res.violation = 0.0;
    return res;
}

SolveResult solve_ps_only(const ChannelSet &H, const ScenarioConfig &cfg,
                          std::uint64_t init_seed)
{
    DriverOptions opt;
    opt.architecture = BeamArch::fully_connected;
    opt.update_delays = false;
    opt.include_common = true;
    opt.init_seed = init_seed;
    return solve_hybrid(H, cfg, opt);
}

static SolveResult dispatch(const ChannelSet &H, const ScenarioConfig &cfg, SchemeArch arch,
                            bool include_common, std::uint64_t init_seed)
{
    if (arch == SchemeArch::fdb)
        return solve_fdb(H, cfg, include_common, init_seed);
    DriverOptions opt;
    opt.architecture =
        arch == SchemeArch::shb ? BeamArch::sub_connected : BeamArch::fully_connected;
    opt.update_delays = arch != SchemeArch::ps;
    opt.include_common = include_common;
    opt.init_seed = init_seed;
    return solve_hybrid(H, cfg, opt);
}

SolveResult solve_sdma(const ChannelSet &H, const ScenarioConfig &cfg, SchemeArch arch,
                       std::uint64_t init_seed)
{
    return dispatch(H, cfg, arch, false, init_seed);
}

SolveResult solve_far(const ChannelSet &H_far, const ChannelSet &H_near,
                      const ScenarioConfig &cfg, SchemeArch arch, bool score_on_far,
                      std::uint64_t init_seed)
{
    SolveResult res = dispatch(H_far, cfg, arch, true, init_seed);
    const ChannelSet &score = score_on_far ? H_far : H_near;
    QcqpOptions solver;
    solver.tol = cfg.solver_tol;
    rescore(res, score, cfg.noise_mw(), true, solver);
    return res;
}

SolveResult solve_scheme(const ScenarioConfig &cfg, const SchemeSpec &spec,
                         std::uint64_t realization_seed)
{
    cfg.validate();
    ArrayGeometry geom = make_geometry(cfg);
    std::vector<UserGeometry> users = sample_scenario(cfg, realization_seed);
    std::vector<double> freqs =
        subcarrier_frequencies(cfg.fc_hz, cfg.bandwidth_hz, cfg.subcarriers);

    // Beam initialization draws from a salt domain disjoint from the
    // per-user geometry streams so the two never share a substream.
    std::uint64_t init_seed = derive_seed(realization_seed, 1000003);

    bool include_common = spec.access == Access::rsma;
    if (spec.field == FieldModel::far)
    {
        ChannelSet H_far =
            generate_channels(geom, users, freqs, FieldModel::far, cfg.nlos_scale());
        ChannelSet H_near =
            generate_channels(geom, users, freqs, FieldModel::near, cfg.nlos_scale());
        if (!include_common)
        {
            SolveResult res = dispatch(H_far, cfg, spec.arch, false, init_seed);
            QcqpOptions solver;
            solver.tol = cfg.solver_tol;
            rescore(res, spec.score_on_far ? H_far : H_near, cfg.noise_mw(), false, solver);
            return res;
        }
        return solve_far(H_far, H_near, cfg, spec.arch, spec.score_on_far, init_seed);
    }

    ChannelSet H =
        generate_channels(geom, users, freqs, FieldModel::near, cfg.nlos_scale());
    return dispatch(H, cfg, spec.arch, include_common, init_seed);
}

} // namespace nfbf
