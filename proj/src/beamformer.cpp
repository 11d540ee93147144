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

#include "nfbf/beamformer.hpp"

#include <cmath>
#include <stdexcept>

namespace nfbf
{

static constexpr double two_pi = 6.283185307179586476925286766559;

SubArrayMap::SubArrayMap(int n, int a, int q) : N(n), A(a), Q(q)
{
    if (n < 1 || a < 1 || q < 1)
        throw std::invalid_argument("sub-array map: dimensions must be positive");
    if (n % a != 0)
        throw std::invalid_argument("sub-array map: RF chain count must divide the antenna count");
    if ((n / a) % q != 0)
        throw std::invalid_argument("sub-array map: TTD count must divide the per-chain antenna count");
}

HybridBeamformer make_beamformer(BeamArch arch, int n, int a, int q, int users,
                                 int subcarriers, double t_max_s)
{
    if (n < 1 || a < 1 || q < 1 || users < 1 || subcarriers < 1)
        throw std::invalid_argument("beamformer: dimensions must be positive");
    if (t_max_s < 0.0)
        throw std::invalid_argument("beamformer: t_max must be nonnegative");

    int row_len;
    if (arch == BeamArch::fully_connected)
    {
        if (n % q != 0)
            throw std::invalid_argument("beamformer: TTD count must divide the antenna count");
        row_len = n;
    }
    else
    {
        SubArrayMap map(n, a, q); // validates divisibility
        row_len = map.per_chain();
    }

    HybridBeamformer beam;
    beam.architecture = arch;
    beam.N = n;
    beam.A = a;
    beam.Q = q;
    beam.t_max_s = t_max_s;
    beam.phases = Eigen::MatrixXd::Zero(a, row_len);
    beam.delays_s = Eigen::MatrixXd::Zero(a, q);
    beam.W.assign(subcarriers, Eigen::MatrixXcd::Zero(a, users + 1));
    return beam;
}

Eigen::VectorXcd analog_column(const HybridBeamformer &beam, double f_hz, int a)
{
    Eigen::VectorXcd col = Eigen::VectorXcd::Zero(beam.N);
    int len = beam.phase_group_len();
    int base = beam.architecture == BeamArch::fully_connected ? 0 : a * (beam.N / beam.A);
    for (int q = 0; q < beam.Q; ++q)
    {
        double rot = -two_pi * f_hz * beam.delays_s(a, q);
        for (int i = 0; i < len; ++i)
            col(base + q * len + i) = std::polar(1.0, beam.phases(a, q * len + i) + rot);
    }
    return col;
}

Eigen::MatrixXcd effective_analog(const HybridBeamformer &beam, double f_hz)
{
    Eigen::MatrixXcd B(beam.N, beam.A);
    for (int a = 0; a < beam.A; ++a)
        B.col(a) = analog_column(beam, f_hz, a);
    return B;
}

Eigen::MatrixXcd assemble_F(const HybridBeamformer &beam)
{
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(beam.N, beam.A * beam.Q);
    int len = beam.phase_group_len();
    for (int a = 0; a < beam.A; ++a)
    {
        int base = beam.architecture == BeamArch::fully_connected ? 0 : a * (beam.N / beam.A);
        for (int q = 0; q < beam.Q; ++q)
            for (int i = 0; i < len; ++i)
                F(base + q * len + i, a * beam.Q + q) = std::polar(1.0, beam.phases(a, q * len + i));
    }
    return F;
}

Eigen::MatrixXcd assemble_T(const HybridBeamformer &beam, double f_hz)
{
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(beam.A * beam.Q, beam.A);
    for (int a = 0; a < beam.A; ++a)
        for (int q = 0; q < beam.Q; ++q)
            T(a * beam.Q + q, a) = std::polar(1.0, -two_pi * f_hz * beam.delays_s(a, q));
    return T;
}

} // namespace nfbf
