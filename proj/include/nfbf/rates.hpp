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

#ifndef NFBF_RATES_HPP
#define NFBF_RATES_HPP

#include <Eigen/Dense>
#include <vector>

#include "nfbf/beamformer.hpp"
#include "nfbf/channel.hpp"
#include "nfbf/qcqp.hpp"

namespace nfbf
{

// Per-subcarrier fully digital precoders. Column 0 of P[m] carries the
// common stream, columns 1..K the private streams. All powers in mW.
struct DigitalEquivalent
{
    std::vector<Eigen::MatrixXcd> P; // per subcarrier: N x (K+1)

    int subcarriers() const { return int(P.size()); }
    int users() const { return P.empty() ? 0 : int(P[0].cols()) - 1; }

    double total_power(int m) const { return P[m].squaredNorm(); }
};

// Common-rate split: C(k,m) is the share of subcarrier m's common rate
// assigned to user k; r_common is the resulting max-min auxiliary value.
struct RateAllocation
{
    Eigen::MatrixXd C;  // K x M, nonnegative
    double r_common = 0.0;
};

// Signal and interference powers, SINRs and rates for every (user,
// subcarrier) pair. Powers in mW, rates in bits/s/Hz. The common-stream
// interference I_c equals the private-stream total S_p + I_p by the SIC
// decoding order, so T_c = S_c + I_c.
struct RateReport
{
    Eigen::MatrixXd Sc, Ic, Sp, Ip;          // K x M powers
    Eigen::MatrixXd gamma_c, gamma_p;        // K x M SINRs
    Eigen::MatrixXd Rc, Rp;                  // K x M rates
    Eigen::VectorXd common_cap;              // per m: min_k Rc(k,m)
    Eigen::VectorXd user_rate;               // per k: sum_m (C + Rp), once attached
    double min_rate = 0.0;
    double sum_rate = 0.0;
    bool has_allocation = false;

    int users() const { return int(Sc.rows()); }
    int subcarriers() const { return int(Sc.cols()); }
};

// Composes the physical precoders P_m = F T_m W_m realized by a hybrid
// beamformer at the given subcarrier frequencies.
DigitalEquivalent effective_precoders(const HybridBeamformer &beam,
                                      const std::vector<double> &freqs_hz);

// Fills the power and SINR fields: S_c = |h'p_0|^2, S_p = |h'p_k|^2,
// I_p = sum_{j != k} |h'p_j|^2 + sigma^2, I_c = S_p + I_p. The noise matrix
// is K x M in mW; the scalar overload broadcasts one value.
RateReport received_powers(const ChannelSet &H, const DigitalEquivalent &P,
                           const Eigen::MatrixXd &noise_mw);
RateReport received_powers(const ChannelSet &H, const DigitalEquivalent &P, double noise_mw);

// Fills the rate fields from the SINRs: R = log2(1 + gamma), plus the
// per-subcarrier common cap min_k Rc.
void rates_from_powers(RateReport &report);

// Attaches a common-rate split, filling user_rate, min_rate and sum_rate.
void attach_allocation(RateReport &report, const RateAllocation &alloc);

// Splits the per-subcarrier common caps to maximize min_k sum_m (C + Rp),
// solved as a linear program by the interior-point core. Subcarriers with a
// nonpositive cap are fixed at C = 0 up front; with no usable cap at all the
// answer is returned directly. Ties between equally good splits land near
// the equal-share point, the analytic center of the optimal face.
RateAllocation allocate_common_rates(const Eigen::VectorXd &caps, const Eigen::MatrixXd &Rp,
                                     const QcqpOptions &opt = {});

// Max-min user rate of a hybrid beamformer under a given allocation,
// computed from true (non-surrogate) rates. Throws if the allocation is
// infeasible against the beamformer's common caps beyond 1e-9.
double evaluate_max_min(const ChannelSet &H, const HybridBeamformer &beam,
                        const RateAllocation &alloc, double noise_mw);

} // namespace nfbf

#endif
