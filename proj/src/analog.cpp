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

#include "nfbf/analog.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace nfbf
{

static const double two_pi = 2.0 * M_PI;

DelayGrid::DelayGrid(double t_max_s, int points, const std::vector<double> &freqs_hz)
{
    if (points < 2)
        throw std::invalid_argument("DelayGrid: need at least two grid points");
    if (t_max_s < 0.0)
        throw std::invalid_argument("DelayGrid: negative delay range");
    if (freqs_hz.empty())
        throw std::invalid_argument("DelayGrid: empty frequency list");

    t = Eigen::VectorXd::LinSpaced(points, 0.0, t_max_s);
    phase.resize(points, Eigen::Index(freqs_hz.size()));
    for (int s = 0; s < points; ++s)
        for (std::size_t m = 0; m < freqs_hz.size(); ++m)
            phase(s, Eigen::Index(m)) = std::polar(1.0, -two_pi * freqs_hz[m] * t(s));
}

int DelayGrid::best_index(const Eigen::VectorXcd &c) const
{
    if (c.size() != phase.cols())
        throw std::invalid_argument("DelayGrid: coefficient count mismatch");
    Eigen::VectorXd score = (phase * c).real();
    int best = 0;
    for (int s = 1; s < score.size(); ++s)
        if (score(s) > score(best))
            best = s;
    return best;
}

static void check_fc(const HybridBeamformer &beam, const char *who)
{
    if (beam.architecture != BeamArch::fully_connected)
        throw std::invalid_argument(std::string(who) +
                                    ": fully connected beamformer required");
}

AnalogAuxiliary update_G(const DigitalEquivalent &P, const HybridBeamformer &beam,
                         const std::vector<double> &freqs_hz, double rho_tilde)
{
    check_fc(beam, "update_G");
    if (rho_tilde <= 0.0)
        throw std::invalid_argument("update_G: penalty must be positive");
    const int M = int(freqs_hz.size());
    if (P.subcarriers() != M || int(beam.W.size()) != M)
        throw std::invalid_argument("update_G: subcarrier count mismatch");

    AnalogAuxiliary aux;
    aux.G.reserve(M);
    const double inv = 1.0 / rho_tilde;
    for (int m = 0; m < M; ++m)
    {
        const Eigen::MatrixXcd &Wm = beam.W[m];
        Eigen::MatrixXcd ft = effective_analog(beam, freqs_hz[m]);
        Eigen::MatrixXcd rhs = P.P[m] * Wm.adjoint() + inv * ft;
        Eigen::MatrixXcd S = Wm * Wm.adjoint();
        S.diagonal().array() += inv;
        // G S = rhs with S Hermitian positive definite.
        aux.G.push_back(S.ldlt().solve(rhs.adjoint()).adjoint());
    }
    return aux;
}

void update_F(HybridBeamformer &beam, const AnalogAuxiliary &aux,
              const std::vector<double> &freqs_hz)
{
    check_fc(beam, "update_F");
    const int M = int(freqs_hz.size());
    if (int(aux.G.size()) != M)
        throw std::invalid_argument("update_F: subcarrier count mismatch");
    const int len = beam.phase_group_len();

    for (int a = 0; a < beam.A; ++a)
        for (int q = 0; q < beam.Q; ++q)
        {
            double t = beam.delays_s(a, q);
            for (int i = 0; i < len; ++i)
            {
                int n = q * len + i;
                std::complex<double> c(0.0, 0.0);
                for (int m = 0; m < M; ++m)
                    c += aux.G[m](n, a) * std::polar(1.0, two_pi * freqs_hz[m] * t);
                if (c != std::complex<double>(0.0, 0.0))
                    beam.phases(a, n) = std::arg(c);
            }
        }
}

void update_T(HybridBeamformer &beam, const AnalogAuxiliary &aux,
              const std::vector<double> &freqs_hz, const DelayGrid &grid)
{
    check_fc(beam, "update_T");
    const int M = int(freqs_hz.size());
    if (int(aux.G.size()) != M)
        throw std::invalid_argument("update_T: subcarrier count mismatch");
    const int len = beam.phase_group_len();

    Eigen::VectorXcd f(len), c(M);
    for (int a = 0; a < beam.A; ++a)
        for (int q = 0; q < beam.Q; ++q)
        {
            for (int i = 0; i < len; ++i)
                f(i) = std::polar(1.0, beam.phases(a, q * len + i));
            for (int m = 0; m < M; ++m)
                c(m) = aux.G[m].col(a).segment(q * len, len).dot(f);
            beam.delays_s(a, q) = grid.t(grid.best_index(c));
        }
}

double analog_objective(const DigitalEquivalent &P, const HybridBeamformer &beam,
                        const AnalogAuxiliary &aux, const std::vector<double> &freqs_hz,
                        double rho_tilde)
{
    const int M = int(freqs_hz.size());
    double obj = 0.0;
    for (int m = 0; m < M; ++m)
    {
        obj += (P.P[m] - aux.G[m] * beam.W[m]).squaredNorm();
        obj += (aux.G[m] - effective_analog(beam, freqs_hz[m])).squaredNorm() / rho_tilde;
    }
    return obj;
}

double analog_closure_gap(const HybridBeamformer &beam, const AnalogAuxiliary &aux,
                          const std::vector<double> &freqs_hz)
{
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < freqs_hz.size(); ++m)
    {
        num += (aux.G[m] - effective_analog(beam, freqs_hz[m])).squaredNorm();
        den += aux.G[m].squaredNorm();
    }
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

AnalogResult optimize_analog_fc(const DigitalEquivalent &P, HybridBeamformer &beam,
                                const std::vector<double> &freqs_hz, const DelayGrid &grid,
                                const AnalogOptions &opt)
{
    check_fc(beam, "optimize_analog_fc");
    AnalogResult res;
    double rho = opt.rho_tilde0;

    for (int outer = 0; outer < opt.outer_max; ++outer)
    {
        ++res.outer_iters;
        AnalogAuxiliary aux = update_G(P, beam, freqs_hz, rho);
        double obj = analog_objective(P, beam, aux, freqs_hz, rho);
        for (int inner = 0; inner < opt.inner_max; ++inner)
        {
            update_F(beam, aux, freqs_hz);
            if (opt.update_delays)
                update_T(beam, aux, freqs_hz, grid);
            aux = update_G(P, beam, freqs_hz, rho);
            double next = analog_objective(P, beam, aux, freqs_hz, rho);
            ++res.inner_iters;
            double dec = (obj - next) / std::max(1.0, std::abs(obj));
            obj = next;
            if (dec < opt.xi2)
                break;
        }
        res.closure = analog_closure_gap(beam, aux, freqs_hz);
        if (res.closure < opt.closure_rel)
        {
            res.converged = true;
            break;
        }
        rho *= opt.alpha;
    }
    return res;
}

} // namespace nfbf
