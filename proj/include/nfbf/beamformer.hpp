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

#ifndef NFBF_BEAMFORMER_HPP
#define NFBF_BEAMFORMER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace nfbf
{

enum class BeamArch
{
    fully_connected, // every RF chain drives all N antennas
    sub_connected    // RF chain a drives the disjoint sub-array of N/A antennas
};

// Row partition of the sub-connected architecture: RF chain a covers rows
// [a*Nt, (a+1)*Nt) with Nt = N/A, and TTD q within that chain covers the
// q-th slice of length Nt/Q. Construction validates divisibility.
struct SubArrayMap
{
    int N = 0, A = 0, Q = 0;

    SubArrayMap(int n, int a, int q);

    int per_chain() const { return N / A; }          // Nt
    int group_len() const { return per_chain() / Q; }
    int row_start(int a, int q) const { return a * per_chain() + q * group_len(); }
};

// True-time-delay hybrid beamformer: per (RF chain a, TTD q) a unit-modulus
// phase-shifter vector and one delay, plus per-subcarrier digital matrices.
// Phases are stored in radians so the unit-modulus constraint holds exactly.
struct HybridBeamformer
{
    BeamArch architecture = BeamArch::fully_connected;
    int N = 0, A = 0, Q = 0;
    double t_max_s = 0.0;

    // Row a holds chain a's phases, concatenated over its Q groups. Fully
    // connected rows have length N (groups of N/Q); sub-connected rows have
    // length N/A (groups of N/(A*Q)).
    Eigen::MatrixXd phases;
    Eigen::MatrixXd delays_s;            // A x Q, each in [0, t_max]
    std::vector<Eigen::MatrixXcd> W;     // per subcarrier: A x (K+1)

    int phase_group_len() const
    {
        return architecture == BeamArch::fully_connected ? N / Q : N / (A * Q);
    }

    // Phase group of TTD (a, q) as a block reference into `phases`.
    Eigen::Block<const Eigen::MatrixXd, 1, Eigen::Dynamic> phase_group(int a, int q) const
    {
        int len = phase_group_len();
        return phases.block<1, Eigen::Dynamic>(a, q * len, 1, len);
    }
};

// Allocates a structurally valid beamformer with all phases and delays zero
// and W matrices zero. Throws on divisibility violations (Q | N for the
// fully connected network; A | N and Q | N/A for the sub-connected one).
HybridBeamformer make_beamformer(BeamArch arch, int n, int a, int q, int users,
                                 int subcarriers, double t_max_s);

// Column a of the frequency-f analog matrix F * T(f): the stacked phase
// vectors rotated by their group delays. Fully connected columns occupy all
// N rows; sub-connected columns live on chain a's sub-array rows.
Eigen::VectorXcd analog_column(const HybridBeamformer &beam, double f_hz, int a);

// Dense N x A analog matrix F * T(f), assembled column by column.
Eigen::MatrixXcd effective_analog(const HybridBeamformer &beam, double f_hz);

// Dense frequency-independent phase matrix F (N x A*Q for fully connected,
// block diagonal N x A*Q for sub-connected). Mostly of interest to tests of
// the sparsity structure; the solvers use effective_analog.
Eigen::MatrixXcd assemble_F(const HybridBeamformer &beam);

// Dense delay matrix T(f) of shape (A*Q) x A, block diagonal with blocks
// exp(-j 2 pi f t_{a,q}).
Eigen::MatrixXcd assemble_T(const HybridBeamformer &beam, double f_hz);

} // namespace nfbf

#endif
