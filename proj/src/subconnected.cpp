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

#include "nfbf/subconnected.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace nfbf
{

static const double two_pi = 2.0 * M_PI;

static void check_sub(const HybridBeamformer &beam, const char *who)
{
    if (beam.architecture != BeamArch::sub_connected)
        throw std::invalid_argument(std::string(who) +
                                    ": sub-connected beamformer required");
}

PsiCoeffs compute_psi(const DigitalEquivalent &P, const HybridBeamformer &beam,
                      const SubArrayMap &map)
{
    check_sub(beam, "compute_psi");
    if (P.subcarriers() != int(beam.W.size()))
        throw std::invalid_argument("compute_psi: subcarrier count mismatch");

    const int M = P.subcarriers();
    const int Nt = map.per_chain();

    PsiCoeffs coeffs;
    coeffs.psi.reserve(M);
    for (int m = 0; m < M; ++m)
    {
        if (P.P[m].rows() != map.N || beam.W[m].rows() != map.A)
            throw std::invalid_argument("compute_psi: shape mismatch");
        Eigen::VectorXcd psi(map.N);
        for (int a = 0; a < map.A; ++a)
            psi.segment(a * Nt, Nt) =
                P.P[m].middleRows(a * Nt, Nt) * beam.W[m].row(a).adjoint();
        coeffs.psi.push_back(std::move(psi));
        coeffs.eta += P.P[m].squaredNorm() + double(Nt) * beam.W[m].squaredNorm();
    }
    return coeffs;
}

double subconnected_objective(const PsiCoeffs &coeffs, const HybridBeamformer &beam,
                              const std::vector<double> &freqs_hz)
{
    check_sub(beam, "subconnected_objective");
    const int M = int(freqs_hz.size());
    const int Nt = beam.N / beam.A;
    const int len = beam.phase_group_len();

    double corr = 0.0;
    Eigen::VectorXcd f(len);
    for (int a = 0; a < beam.A; ++a)
        for (int q = 0; q < beam.Q; ++q)
        {
            for (int i = 0; i < len; ++i)
                f(i) = std::polar(1.0, beam.phases(a, q * len + i));
            for (int m = 0; m < M; ++m)
            {
                std::complex<double> s =
                    f.dot(coeffs.psi[m].segment(a * Nt + q * len, len));
                corr += (s * std::polar(1.0, two_pi * freqs_hz[m] * beam.delays_s(a, q)))
                            .real();
            }
        }
    return coeffs.eta - 2.0 * corr;
}

void update_f_sub(HybridBeamformer &beam, const PsiCoeffs &coeffs,
                  const std::vector<double> &freqs_hz)
{
    check_sub(beam, "update_f_sub");
    const int M = int(freqs_hz.size());
    const int Nt = beam.N / beam.A;
    const int len = beam.phase_group_len();

    for (int a = 0; a < beam.A; ++a)
        for (int q = 0; q < beam.Q; ++q)
        {
            double t = beam.delays_s(a, q);
            for (int i = 0; i < len; ++i)
            {
                std::complex<double> c(0.0, 0.0);
                for (int m = 0; m < M; ++m)
                    c += coeffs.psi[m](a * Nt + q * len + i) *
                         std::polar(1.0, two_pi * freqs_hz[m] * t);
                if (c != std::complex<double>(0.0, 0.0))
                    beam.phases(a, q * len + i) = std::arg(c);
            }
        }
}

void update_t_sub(HybridBeamformer &beam, const PsiCoeffs &coeffs,
                  const std::vector<double> &freqs_hz, const DelayGrid &grid)
{
    check_sub(beam, "update_t_sub");
    const int M = int(freqs_hz.size());
    const int Nt = beam.N / beam.A;
    const int len = beam.phase_group_len();

    Eigen::VectorXcd f(len), c(M);
    for (int a = 0; a < beam.A; ++a)
        for (int q = 0; q < beam.Q; ++q)
        {
            for (int i = 0; i < len; ++i)
                f(i) = std::polar(1.0, beam.phases(a, q * len + i));
            for (int m = 0; m < M; ++m)
                c(m) = coeffs.psi[m].segment(a * Nt + q * len, len).dot(f);
            beam.delays_s(a, q) = grid.t(grid.best_index(c));
        }
}

AnalogResult optimize_analog_sub(const DigitalEquivalent &P, HybridBeamformer &beam,
                                 const std::vector<double> &freqs_hz, const DelayGrid &grid,
                                 const SubAnalogOptions &opt)
{
    check_sub(beam, "optimize_analog_sub");
    SubArrayMap map(beam.N, beam.A, beam.Q);
    PsiCoeffs coeffs = compute_psi(P, beam, map);

    AnalogResult res;
    res.outer_iters = 1;
    double obj = subconnected_objective(coeffs, beam, freqs_hz);
    for (int inner = 0; inner < opt.max_iters; ++inner)
    {
        update_f_sub(beam, coeffs, freqs_hz);
        if (opt.update_delays)
            update_t_sub(beam, coeffs, freqs_hz, grid);
        double next = subconnected_objective(coeffs, beam, freqs_hz);
        ++res.inner_iters;
        double dec = (obj - next) / std::max(1.0, std::abs(obj));
        obj = next;
        if (dec < opt.xi)
            break;
    }

    double pnorm = 0.0;
    for (int m = 0; m < P.subcarriers(); ++m)
        pnorm += P.P[m].squaredNorm();
    res.closure = pnorm > 0.0 ? std::max(0.0, obj) / pnorm : 0.0;
    res.converged = true;
    return res;
}

} // namespace nfbf
