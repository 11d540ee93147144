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

#include <cmath>
#include <complex>

#include <doctest.h>

#include "nfbf/driver.hpp"
#include "nfbf/rng.hpp"

using namespace nfbf;

namespace
{

std::complex<double> crand(Rng &rng)
{
    return {rng.uniform(-1, 1), rng.uniform(-1, 1)};
}

HybridBeamformer random_beam(BeamArch arch, int n, int a, int q, int users, int m,
                             double t_max, std::uint64_t seed)
{
    HybridBeamformer beam = make_beamformer(arch, n, a, q, users, m, t_max);
    Rng rng(seed);
    for (int i = 0; i < beam.phases.rows(); ++i)
        for (int j = 0; j < beam.phases.cols(); ++j)
            beam.phases(i, j) = rng.uniform(-M_PI, M_PI);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < q; ++j)
            beam.delays_s(i, j) = rng.uniform(0.0, t_max);
    for (auto &W : beam.W)
        for (int i = 0; i < W.rows(); ++i)
            for (int j = 0; j < W.cols(); ++j)
                W(i, j) = crand(rng);
    return beam;
}

DigitalEquivalent random_precoders(int n, int k, int m, std::uint64_t seed, double amp = 1.0)
{
    Rng rng(seed);
    DigitalEquivalent P;
    for (int i = 0; i < m; ++i)
    {
        Eigen::MatrixXcd Pm(n, k + 1);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < k + 1; ++c)
                Pm(r, c) = amp * crand(rng);
        P.P.push_back(Pm);
    }
    return P;
}

// A small but nontrivial scenario that keeps solve_hybrid runs short.
ScenarioConfig tiny_config()
{
    ScenarioConfig cfg = desk_profile();
    cfg.antennas = 16;
    cfg.rf_chains = 4;
    cfg.ttds_per_chain = 2;
    cfg.users = 2;
    cfg.subcarriers = 3;
    cfg.paths_per_user = 1;
    cfg.search_grid = 65;
    cfg.bcd_inner_max = 6;
    cfg.mm_max_iters = 8;
    cfg.outer_max = 12;
    cfg.validate();
    return cfg;
}

ChannelSet tiny_channels(const ScenarioConfig &cfg, std::uint64_t seed)
{
    ArrayGeometry geo = make_geometry(cfg);
    std::vector<UserGeometry> users = sample_scenario(cfg, seed);
    return generate_channels(
        geo, users, subcarrier_frequencies(cfg.fc_hz, cfg.bandwidth_hz, cfg.subcarriers),
        FieldModel::near, cfg.nlos_scale());
}

} // namespace

TEST_SUITE("driver")
{
    TEST_CASE("combiner update solves the per-subcarrier least squares exactly")
    {
        const int N = 16, A = 4, Q = 2, K = 2, M = 2;
        std::vector<double> freqs = {28e9, 31e9};

        // Consistent system: P already lies in the analog column space, so
        // the update must reproduce the generating W with zero residual.
        HybridBeamformer truth =
            random_beam(BeamArch::fully_connected, N, A, Q, K, M, 1e-9, 3);
        DigitalEquivalent P;
        for (int m = 0; m < M; ++m)
            P.P.push_back(effective_analog(truth, freqs[m]) * truth.W[m]);

        HybridBeamformer beam = truth;
        for (auto &W : beam.W)
            W.setZero();
        DigitalUpdateInfo info = update_W(P, beam, freqs);
        CHECK_FALSE(info.regularized);
        for (int m = 0; m < M; ++m)
            CHECK((beam.W[m] - truth.W[m]).cwiseAbs().maxCoeff() < 1e-9);

        // Inconsistent system: the residual is orthogonal to the analog
        // columns and no other W does better.
        DigitalEquivalent P2 = random_precoders(N, K, M, 4);
        update_W(P2, beam, freqs);
        Rng rng(5);
        double base = 0.0;
        for (int m = 0; m < M; ++m)
        {
            Eigen::MatrixXcd B = effective_analog(beam, freqs[m]);
            Eigen::MatrixXcd res = P2.P[m] - B * beam.W[m];
            CHECK((B.adjoint() * res).cwiseAbs().maxCoeff() < 1e-8 * P2.P[m].norm());
            base += res.squaredNorm();
        }
        for (int trial = 0; trial < 20; ++trial)
        {
            double moved = 0.0;
            for (int m = 0; m < M; ++m)
            {
                Eigen::MatrixXcd Wm = beam.W[m];
                for (int i = 0; i < Wm.rows(); ++i)
                    for (int j = 0; j < Wm.cols(); ++j)
                        Wm(i, j) += 0.1 * crand(rng);
                moved += (P2.P[m] - effective_analog(beam, freqs[m]) * Wm).squaredNorm();
            }
            CHECK(moved >= base - 1e-10);
        }
    }

    TEST_CASE("coupling violation is the normalized distance to the implementable set")
    {
        const int N = 16, A = 4, Q = 2, K = 2, M = 2;
        std::vector<double> freqs = {28e9, 31e9};
        HybridBeamformer beam =
            random_beam(BeamArch::fully_connected, N, A, Q, K, M, 1e-9, 13);

        // Implementable P: violation is zero.
        DigitalEquivalent P;
        for (int m = 0; m < M; ++m)
            P.P.push_back(effective_analog(beam, freqs[m]) * beam.W[m]);
        CHECK(coupling_violation(P, beam, freqs) < 1e-12);

        // Scalar oracle on a random P.
        DigitalEquivalent P2 = random_precoders(N, K, M, 14, 0.05);
        double num = 0.0, den = 0.0;
        for (int m = 0; m < M; ++m)
        {
            num += (P2.P[m] - effective_analog(beam, freqs[m]) * beam.W[m]).squaredNorm();
            den += P2.P[m].squaredNorm();
        }
        CHECK(coupling_violation(P2, beam, freqs) ==
              doctest::Approx(num / std::max(1.0, den)).epsilon(1e-12));
    }

    TEST_CASE("initial beamformer spends the full budget with zero violation")
    {
        ScenarioConfig cfg = tiny_config();
        ChannelSet H = tiny_channels(cfg, 77);
        std::vector<double> freqs = H.freqs_hz;

        for (BeamArch arch : {BeamArch::fully_connected, BeamArch::sub_connected})
        {
            HybridBeamformer beam = initialize_beam(H, cfg, arch, true, 9);
            CHECK((beam.delays_s.array() == 0.0).all());

            DigitalEquivalent P;
            for (int m = 0; m < cfg.subcarriers; ++m)
                P.P.push_back(effective_analog(beam, freqs[m]) * beam.W[m]);
            // The digital equivalent of the initial beamformer is exactly
            // implementable and exactly on the power budget.
            CHECK(coupling_violation(P, beam, freqs) < 1e-12);
            for (int m = 0; m < cfg.subcarriers; ++m)
                CHECK(P.total_power(m) == doctest::Approx(cfg.power_mw()).epsilon(1e-9));
        }

        // Different seeds give different phases; equal seeds reproduce.
        HybridBeamformer b1 = initialize_beam(H, cfg, BeamArch::fully_connected, true, 1);
        HybridBeamformer b2 = initialize_beam(H, cfg, BeamArch::fully_connected, true, 2);
        HybridBeamformer b3 = initialize_beam(H, cfg, BeamArch::fully_connected, true, 1);
        CHECK((b1.phases - b2.phases).cwiseAbs().maxCoeff() > 1e-3);
        CHECK((b1.phases - b3.phases).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("projection rescales overshooting subcarriers onto the budget")
    {
        ScenarioConfig cfg = tiny_config();
        ChannelSet H = tiny_channels(cfg, 78);
        HybridBeamformer beam = initialize_beam(H, cfg, BeamArch::fully_connected, true, 11);
        // Inflate one combiner so its subcarrier overshoots the budget.
        beam.W[1] *= 3.0;

        SolveResult res = project_and_finalize(beam, H, cfg.noise_mw(), cfg.power_mw(),
                                               true, QcqpOptions{});
        REQUIRE(res.beam.has_value());
        for (int m = 0; m < cfg.subcarriers; ++m)
        {
            CHECK(res.precoders.total_power(m) <= cfg.power_mw() * (1.0 + 1e-9));
            if (m != 1)
                CHECK(res.precoders.total_power(m) ==
                      doctest::Approx(cfg.power_mw()).epsilon(1e-9));
        }
        // The overshooting combiner was scaled back exactly onto the budget.
        CHECK(res.precoders.total_power(1) ==
              doctest::Approx(cfg.power_mw()).epsilon(1e-9));

        // Reported rates are consistent with the returned precoders.
        RateReport rep = received_powers(H, res.precoders, cfg.noise_mw());
        rates_from_powers(rep);
        CHECK(res.max_min_rate ==
              doctest::Approx((res.alloc.C + rep.Rp).rowwise().sum().minCoeff())
                  .epsilon(1e-9));
        for (int m = 0; m < cfg.subcarriers; ++m)
            CHECK(res.alloc.C.col(m).sum() <= rep.common_cap(m) + 1e-9);
    }

    TEST_CASE("hybrid solve converges with monotone penalty diagnostics")
    {
        ScenarioConfig cfg = tiny_config();
        ChannelSet H = tiny_channels(cfg, 79);

        DriverOptions opt;
        opt.architecture = BeamArch::fully_connected;
        SolveResult res = solve_hybrid(H, cfg, opt);

        REQUIRE(res.beam.has_value());
        const PenaltyState &pen = res.penalty;
        REQUIRE(pen.outer_iter >= 1);
        CHECK(pen.violation_history.size() == std::size_t(pen.outer_iter));
        CHECK(pen.objective_history.size() == std::size_t(pen.outer_iter));
        CHECK(pen.wall_ms_history.size() == std::size_t(pen.outer_iter));

        // Terminal violation is what the certificate asserts.
        CHECK(res.certified == (pen.violation_history.back() < cfg.violation_tol));
        CHECK(res.violation >= 0.0);

        // Cumulative wall time can only grow.
        for (std::size_t i = 1; i < pen.wall_ms_history.size(); ++i)
            CHECK(pen.wall_ms_history[i] >= pen.wall_ms_history[i - 1]);

        // The reported rates come from the physical (implementable) beam.
        DigitalEquivalent P;
        for (int m = 0; m < cfg.subcarriers; ++m)
            P.P.push_back(effective_analog(*res.beam, H.freqs_hz[m]) * res.beam->W[m]);
        for (int m = 0; m < cfg.subcarriers; ++m)
        {
            CHECK((P.P[m] - res.precoders.P[m]).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(res.precoders.total_power(m) <= cfg.power_mw() * (1.0 + 1e-9));
        }
        RateReport rep = received_powers(H, res.precoders, cfg.noise_mw());
        rates_from_powers(rep);
        attach_allocation(rep, res.alloc);
        CHECK(res.max_min_rate == doctest::Approx(rep.min_rate).epsilon(1e-12));
        CHECK(res.sum_rate == doctest::Approx(rep.sum_rate).epsilon(1e-12));
    }

    TEST_CASE("disabling the common stream yields an SDMA solution")
    {
        ScenarioConfig cfg = tiny_config();
        cfg.outer_max = 6;
        ChannelSet H = tiny_channels(cfg, 80);

        DriverOptions opt;
        opt.include_common = false;
        SolveResult res = solve_hybrid(H, cfg, opt);
        REQUIRE(res.beam.has_value());
        CHECK(res.alloc.C.cwiseAbs().maxCoeff() == 0.0);
        for (int m = 0; m < cfg.subcarriers; ++m)
            CHECK(res.precoders.P[m].col(0).cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("sub-connected architecture produces a valid certified solve")
    {
        ScenarioConfig cfg = tiny_config();
        ChannelSet H = tiny_channels(cfg, 81);

        DriverOptions opt;
        opt.architecture = BeamArch::sub_connected;
        SolveResult res = solve_hybrid(H, cfg, opt);
        REQUIRE(res.beam.has_value());
        CHECK(res.beam->architecture == BeamArch::sub_connected);
        CHECK(res.max_min_rate > 0.0);
        for (int m = 0; m < cfg.subcarriers; ++m)
            CHECK(res.precoders.total_power(m) <= cfg.power_mw() * (1.0 + 1e-9));
    }

    TEST_CASE("phase-shifter-only mode keeps every delay at zero")
    {
        ScenarioConfig cfg = tiny_config();
        cfg.outer_max = 6;
        ChannelSet H = tiny_channels(cfg, 82);

        DriverOptions opt;
        opt.update_delays = false;
        SolveResult res = solve_hybrid(H, cfg, opt);
        REQUIRE(res.beam.has_value());
        CHECK((res.beam->delays_s.array() == 0.0).all());
    }
}
