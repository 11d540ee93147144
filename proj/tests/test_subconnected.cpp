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

#include "nfbf/rng.hpp"
#include "nfbf/subconnected.hpp"

using namespace nfbf;

namespace
{

std::complex<double> crand(Rng &rng)
{
    return {rng.uniform(-1, 1), rng.uniform(-1, 1)};
}

HybridBeamformer random_sub_beam(int n, int a, int q, int users, int m, double t_max,
                                 std::uint64_t seed)
{
    HybridBeamformer beam =
        make_beamformer(BeamArch::sub_connected, n, a, q, users, m, t_max);
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

DigitalEquivalent random_precoders(int n, int k, int m, std::uint64_t seed)
{
    Rng rng(seed);
    DigitalEquivalent P;
    for (int i = 0; i < m; ++i)
    {
        Eigen::MatrixXcd Pm(n, k + 1);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < k + 1; ++c)
                Pm(r, c) = crand(rng);
        P.P.push_back(Pm);
    }
    return P;
}

// Coupling distance computed the direct way, as the reference for the
// decomposed evaluation.
double direct_distance(const DigitalEquivalent &P, const HybridBeamformer &beam,
                       const std::vector<double> &freqs_hz)
{
    double d = 0.0;
    for (std::size_t m = 0; m < freqs_hz.size(); ++m)
        d += (P.P[m] - effective_analog(beam, freqs_hz[m]) * beam.W[m]).squaredNorm();
    return d;
}

} // namespace

TEST_SUITE("subconnected")
{
    TEST_CASE("psi slices match their defining products")
    {
        const int N = 12, A = 3, Q = 2, K = 2, M = 2;
        HybridBeamformer beam = random_sub_beam(N, A, Q, K, M, 1e-9, 7);
        DigitalEquivalent P = random_precoders(N, K, M, 8);
        SubArrayMap map(N, A, Q);

        PsiCoeffs coeffs = compute_psi(P, beam, map);
        REQUIRE(coeffs.psi.size() == 2);

        for (int m = 0; m < M; ++m)
            for (int a = 0; a < A; ++a)
            {
                // psi rows of sub-array a: P rows times the conjugated W row.
                Eigen::VectorXcd want =
                    P.P[m].middleRows(a * map.per_chain(), map.per_chain()) *
                    beam.W[m].row(a).adjoint();
                Eigen::VectorXcd got =
                    coeffs.psi[m].segment(a * map.per_chain(), map.per_chain());
                CHECK((want - got).cwiseAbs().maxCoeff() < 1e-12);
            }

        double eta = 0.0;
        for (int m = 0; m < M; ++m)
            eta += P.P[m].squaredNorm() +
                   double(map.per_chain()) * beam.W[m].squaredNorm();
        CHECK(coeffs.eta == doctest::Approx(eta).epsilon(1e-12));
    }

    TEST_CASE("decomposed objective equals the direct Frobenius distance")
    {
        Rng rng(17);
        for (int trial = 0; trial < 10; ++trial)
        {
            const int N = 12, A = 3, Q = 2, K = 2, M = 2;
            HybridBeamformer beam = random_sub_beam(N, A, Q, K, M, 1e-9, 100 + trial);
            DigitalEquivalent P = random_precoders(N, K, M, 200 + trial);
            std::vector<double> freqs = {27.5e9, 31e9};
            SubArrayMap map(N, A, Q);

            PsiCoeffs coeffs = compute_psi(P, beam, map);
            double direct = direct_distance(P, beam, freqs);
            double decomposed = subconnected_objective(coeffs, beam, freqs);
            CHECK(decomposed == doctest::Approx(direct).epsilon(1e-10));

            // Still exact after phases and delays move.
            beam.phases.array() += rng.uniform(-1.0, 1.0);
            beam.delays_s.array() += rng.uniform(0.0, 2e-10);
            CHECK(subconnected_objective(coeffs, beam, freqs) ==
                  doctest::Approx(direct_distance(P, beam, freqs)).epsilon(1e-10));
        }
    }

    TEST_CASE("phase update improves and is a per-entry maximizer")
    {
        const int N = 12, A = 3, Q = 2, K = 2, M = 2;
        HybridBeamformer beam = random_sub_beam(N, A, Q, K, M, 1e-9, 27);
        DigitalEquivalent P = random_precoders(N, K, M, 28);
        std::vector<double> freqs = {27.5e9, 31e9};
        SubArrayMap map(N, A, Q);
        PsiCoeffs coeffs = compute_psi(P, beam, map);

        double before = subconnected_objective(coeffs, beam, freqs);
        update_f_sub(beam, coeffs, freqs);
        double after = subconnected_objective(coeffs, beam, freqs);
        CHECK(after <= before + 1e-12);

        // No single phase entry can do better.
        Rng rng(29);
        for (int trial = 0; trial < 30; ++trial)
        {
            int a = int(rng.uniform() * A);
            int i = int(rng.uniform() * map.per_chain());
            HybridBeamformer moved = beam;
            moved.phases(a, i) += rng.uniform(-M_PI, M_PI);
            CHECK(subconnected_objective(coeffs, moved, freqs) >= after - 1e-10);
        }
    }

    TEST_CASE("delay update improves and is grid-exact")
    {
        const int N = 12, A = 3, Q = 2, K = 2, M = 2;
        HybridBeamformer beam = random_sub_beam(N, A, Q, K, M, 2e-9, 37);
        DigitalEquivalent P = random_precoders(N, K, M, 38);
        std::vector<double> freqs = {27.5e9, 31e9};
        SubArrayMap map(N, A, Q);
        PsiCoeffs coeffs = compute_psi(P, beam, map);
        DelayGrid grid(2e-9, 129, freqs);

        double before = subconnected_objective(coeffs, beam, freqs);
        update_t_sub(beam, coeffs, freqs, grid);
        double after = subconnected_objective(coeffs, beam, freqs);
        CHECK(after <= before + 1e-12);

        for (int a = 0; a < A; ++a)
            for (int q = 0; q < Q; ++q)
                for (int s = 0; s < grid.t.size(); s += 8)
                {
                    HybridBeamformer moved = beam;
                    moved.delays_s(a, q) = grid.t(s);
                    CHECK(subconnected_objective(coeffs, moved, freqs) >= after - 1e-10);
                }
    }

    TEST_CASE("the alternation drives the distance down monotonically")
    {
        const int N = 16, A = 4, Q = 2, K = 2, M = 3;
        HybridBeamformer beam = random_sub_beam(N, A, Q, K, M, 1e-9, 47);
        DigitalEquivalent P = random_precoders(N, K, M, 48);
        std::vector<double> freqs = {27e9, 30e9, 33e9};
        DelayGrid grid(1e-9, 65, freqs);

        double before = direct_distance(P, beam, freqs);
        SubAnalogOptions opt;
        AnalogResult res = optimize_analog_sub(P, beam, freqs, grid, opt);
        double after = direct_distance(P, beam, freqs);
        CHECK(res.converged);
        CHECK(after <= before + 1e-10);
        CHECK(res.inner_iters >= 1);
        CHECK(res.inner_iters <= opt.max_iters);

        // Running again from the fixed point cannot improve further by more
        // than the stop tolerance allows.
        double again_before = after;
        optimize_analog_sub(P, beam, freqs, grid, opt);
        double again_after = direct_distance(P, beam, freqs);
        CHECK(again_after <= again_before + 1e-10);
        CHECK(again_before - again_after <= opt.xi * (1.0 + again_before));
    }

    TEST_CASE("an implementable composite is matched exactly from the start")
    {
        const int N = 12, A = 3, Q = 2, K = 2, M = 2;
        std::vector<double> freqs = {27.5e9, 31e9};
        DelayGrid grid(1e-9, 65, freqs);
        HybridBeamformer truth = random_sub_beam(N, A, Q, K, M, 1e-9, 57);
        for (int a = 0; a < A; ++a)
            for (int q = 0; q < Q; ++q)
                truth.delays_s(a, q) = grid.t((9 * (a * Q + q + 1)) % 65);
        DigitalEquivalent P;
        for (int m = 0; m < M; ++m)
            P.P.push_back(effective_analog(truth, freqs[m]) * truth.W[m]);

        HybridBeamformer beam = truth;
        SubAnalogOptions opt;
        AnalogResult res = optimize_analog_sub(P, beam, freqs, grid, opt);
        CHECK(res.converged);
        CHECK(direct_distance(P, beam, freqs) < 1e-12);
    }

    TEST_CASE("pinned delays stay while phases adapt")
    {
        const int N = 12, A = 3, Q = 2, K = 2, M = 2;
        HybridBeamformer beam = random_sub_beam(N, A, Q, K, M, 1e-9, 67);
        beam.delays_s.setConstant(3e-10);
        Eigen::MatrixXd phases0 = beam.phases;
        DigitalEquivalent P = random_precoders(N, K, M, 68);
        std::vector<double> freqs = {27.5e9, 31e9};
        DelayGrid grid(1e-9, 65, freqs);

        SubAnalogOptions opt;
        opt.update_delays = false;
        optimize_analog_sub(P, beam, freqs, grid, opt);
        CHECK((beam.delays_s.array() == 3e-10).all());
        CHECK((beam.phases - phases0).cwiseAbs().maxCoeff() > 1e-6);
    }

    TEST_CASE("sub-array map rejects indivisible layouts")
    {
        CHECK_THROWS_AS(SubArrayMap(12, 5, 2), std::invalid_argument);
        CHECK_THROWS_AS(SubArrayMap(12, 3, 3), std::invalid_argument);
        SubArrayMap ok(12, 3, 2);
        CHECK(ok.per_chain() == 4);
        CHECK(ok.group_len() == 2);
        CHECK(ok.row_start(2, 1) == 10);
    }
}
