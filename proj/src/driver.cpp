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

#include "nfbf/driver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nfbf/analog.hpp"
#include "nfbf/rng.hpp"
#include "nfbf/subconnected.hpp"

namespace nfbf
{

DigitalUpdateInfo update_W(const DigitalEquivalent &P, HybridBeamformer &beam,
                           const std::vector<double> &freqs_hz)
{
    const int M = int(freqs_hz.size());
    if (P.subcarriers() != M || int(beam.W.size()) != M)
        throw std::invalid_argument("update_W: subcarrier count mismatch");

    DigitalUpdateInfo info;
    for (int m = 0; m < M; ++m)
    {
        Eigen::MatrixXcd B = effective_analog(beam, freqs_hz[m]);
        Eigen::MatrixXcd S = B.adjoint() * B;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(S);
        double lo = eig.eigenvalues().minCoeff();
        double hi = eig.eigenvalues().maxCoeff();
        if (lo <= 0.0 || hi / lo > 1e12)
        {
            S.diagonal().array() += 1e-10 * S.trace().real() / double(beam.A);
            info.regularized = true;
        }
        beam.W[m] = S.ldlt().solve(B.adjoint() * P.P[m]);
    }
    return info;
}

double coupling_violation(const DigitalEquivalent &P, const HybridBeamformer &beam,
                          const std::vector<double> &freqs_hz)
{
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < freqs_hz.size(); ++m)
    {
        num += (P.P[m] - effective_analog(beam, freqs_hz[m]) * beam.W[m]).squaredNorm();
        den += P.P[m].squaredNorm();
    }
    return num / std::max(1.0, den);
}

HybridBeamformer initialize_beam(const ChannelSet &H, const ScenarioConfig &cfg,
                                 BeamArch arch, bool include_common, std::uint64_t seed)
{
    const int M = H.subcarriers();
    const int K = H.users();
    HybridBeamformer beam = make_beamformer(arch, cfg.antennas, cfg.rf_chains,
                                            cfg.ttds_per_chain, K, M, cfg.t_max());

    Rng rng(derive_seed(seed, 0));
    for (int a = 0; a < beam.phases.rows(); ++a)
        for (int n = 0; n < beam.phases.cols(); ++n)
            beam.phases(a, n) = rng.uniform(-M_PI, M_PI);

    // Matched-filter combiners against the analog front end, common column
    // matched to the user-mean channel, each subcarrier scaled onto the
    // power budget so the initial coupling violation is exactly zero.
    const double p_th = cfg.power_mw();
    for (int m = 0; m < M; ++m)
    {
        Eigen::MatrixXcd B = effective_analog(beam, H.freqs_hz[m]);
        Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(beam.A, K + 1);
        if (include_common)
            W.col(0) = B.adjoint() * H.channels[m].rowwise().mean();
        for (int k = 0; k < K; ++k)
            W.col(k + 1) = B.adjoint() * H.channels[m].col(k);
        double pw = (B * W).squaredNorm();
        if (pw > 0.0)
            W *= std::sqrt(p_th / pw);
        beam.W[m] = W;
    }
    return beam;
}

SolveResult project_and_finalize(const HybridBeamformer &beam, const ChannelSet &H,
                                 double noise_mw, double p_th_mw, bool include_common,
                                 const QcqpOptions &solver)
{
    SolveResult res;
    res.beam = beam;
    for (int m = 0; m < H.subcarriers(); ++m)
    {
        double pw = (effective_analog(beam, H.freqs_hz[m]) * beam.W[m]).squaredNorm();
        if (pw > p_th_mw && pw > 0.0)
            res.beam->W[m] *= std::sqrt(p_th_mw / pw);
    }

    res.precoders = effective_precoders(*res.beam, H.freqs_hz);
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
    res.certified = true;
    res.violation = 0.0;
    return res;
}

SolveResult solve_hybrid(const ChannelSet &H, const ScenarioConfig &cfg,
                         const DriverOptions &opt)
{
    if (H.antennas() != cfg.antennas || H.users() != cfg.users ||
        H.subcarriers() != cfg.subcarriers)
        throw std::invalid_argument("solve_hybrid: channel set does not match config");

    const std::vector<double> &freqs = H.freqs_hz;
    const double noise = cfg.noise_mw();
    const double p_th = cfg.power_mw();
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t0)
            .count();
    };

    HybridBeamformer beam =
        initialize_beam(H, cfg, opt.architecture, opt.include_common, opt.init_seed);
    DelayGrid grid(cfg.t_max(), cfg.search_grid, freqs);
    DigitalEquivalent P = effective_precoders(beam, freqs);

    QcqpOptions solver;
    solver.tol = cfg.solver_tol;

    DigitalOptions dopt;
    dopt.p_th_mw = p_th;
    dopt.xi1 = cfg.xi1;
    dopt.max_iters = cfg.mm_max_iters;
    dopt.include_common = opt.include_common;
    dopt.solver = solver;

    AnalogOptions aopt;
    aopt.rho_tilde0 = cfg.rho_tilde0;
    aopt.alpha = cfg.alpha;
    aopt.xi2 = cfg.xi2;
    aopt.closure_rel = cfg.analog_closure;
    aopt.inner_max = cfg.analog_inner_max;
    aopt.outer_max = cfg.analog_outer_max;
    aopt.update_delays = opt.update_delays;

    SubAnalogOptions sopt;
    sopt.xi = cfg.xi_sub > 0.0 ? cfg.xi_sub : cfg.xi2;
    sopt.max_iters = cfg.analog_inner_max;
    sopt.update_delays = opt.update_delays;

    const bool sub = opt.architecture == BeamArch::sub_connected;
    const double xi_stop = (sub && cfg.xi4 > 0.0) ? cfg.xi4 : cfg.xi3;

    PenaltyState state;
    state.rho = cfg.rho0;
    state.alpha = cfg.alpha;

    RateAllocation alloc;
    bool converged = false;

    for (int outer = 0; outer < cfg.outer_max; ++outer)
    {
        state.outer_iter = outer + 1;
        dopt.rho_inv = 1.0 / state.rho;

        double r_prev = -std::numeric_limits<double>::infinity();
        for (int cycle = 0; cycle < cfg.bcd_inner_max; ++cycle)
        {
            DigitalEquivalent targets = effective_precoders(beam, freqs);
            DigitalResult dres = optimize_digital(H, &targets, P, noise, dopt);
            P = dres.P;
            alloc = dres.alloc;

            if (sub)
                optimize_analog_sub(P, beam, freqs, grid, sopt);
            else
                optimize_analog_fc(P, beam, freqs, grid, aopt);
            update_W(P, beam, freqs);

            double gain = alloc.r_common - r_prev;
            r_prev = alloc.r_common;
            if (gain < xi_stop)
                break;
        }

        state.objective_history.push_back(alloc.r_common);
        state.violation_history.push_back(coupling_violation(P, beam, freqs));
        state.wall_ms_history.push_back(elapsed_ms());
        if (state.violation_history.back() < cfg.violation_tol)
        {
            converged = true;
            break;
        }
        state.rho *= state.alpha;
    }

    SolveResult res = project_and_finalize(beam, H, noise, p_th, opt.include_common, solver);
    res.penalty = std::move(state);
    res.certified = converged;
    res.violation =
        res.penalty.violation_history.empty() ? 0.0 : res.penalty.violation_history.back();
    return res;
}

} // namespace nfbf
