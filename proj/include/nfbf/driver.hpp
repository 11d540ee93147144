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

#ifndef NFBF_DRIVER_HPP
#define NFBF_DRIVER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "nfbf/beamformer.hpp"
#include "nfbf/channel.hpp"
#include "nfbf/config.hpp"
#include "nfbf/mm.hpp"
#include "nfbf/rates.hpp"

namespace nfbf
{

// Penalty schedule bookkeeping across the driver's outer iterations.
struct PenaltyState
{
    double rho = 0.0;
    double alpha = 0.5;
    std::vector<double> violation_history; // relative coupling violation per outer iter
    std::vector<double> objective_history; // max-min auxiliary per outer iter
    std::vector<double> wall_ms_history;   // cumulative wall time per outer iter
    int outer_iter = 0;
};

struct SolveResult
{
    std::optional<HybridBeamformer> beam; // absent for the fully digital scheme
    DigitalEquivalent precoders;          // physical precoders behind `report`
    RateAllocation alloc;
    RateReport report;
    PenaltyState penalty;
    bool certified = false;
    double max_min_rate = 0.0;
    double sum_rate = 0.0;
    double violation = 0.0;               // terminal relative coupling violation
};

// Least-squares digital update W_m = (B' B)^{-1} B' P_m with B = F T_m; the
// residual is orthogonal to the analog column space. A condition number
// above 1e12 adds a ridge of 1e-10 trace/A and sets `regularized`.
struct DigitalUpdateInfo
{
    bool regularized = false;
};
DigitalUpdateInfo update_W(const DigitalEquivalent &P, HybridBeamformer &beam,
                           const std::vector<double> &freqs_hz);

// Relative coupling violation sum_m ||P_m - F T_m W_m||^2 normalized by
// max(1, sum_m ||P_m||^2).
double coupling_violation(const DigitalEquivalent &P, const HybridBeamformer &beam,
                          const std::vector<double> &freqs_hz);

struct DriverOptions
{
    BeamArch architecture = BeamArch::fully_connected;
    bool update_delays = true;    // false yields the phase-shifter-only scheme
    bool include_common = true;   // false disables the common stream
    std::uint64_t init_seed = 1;  // seeds the random initial phases
};

// Penalty-based block-coordinate design of the hybrid beamformer: the inner
// loop cycles digital precoders (surrogate ascent), analog phases/delays,
// and digital combiners until the max-min auxiliary stops gaining; the outer
// loop tightens the penalty until the digital equivalent coincides with the
// implementable beamformer, then projects and re-evaluates true rates.
SolveResult solve_hybrid(const ChannelSet &H, const ScenarioConfig &cfg,
                         const DriverOptions &opt);

// Scales any subcarrier exceeding the power budget back onto it, recomputes
// true rates from the physical beamformer, and reallocates the common rate
// against the true caps.
SolveResult project_and_finalize(const HybridBeamformer &beam, const ChannelSet &H,
                                 double noise_mw, double p_th_mw, bool include_common,
                                 const QcqpOptions &solver = {});

// Builds the initial beamformer: uniform random phases from the seed, zero
// delays, matched-filter combiners normalized to the power budget. Starting
// from zero delay keeps the initial point identical to the
// phase-shifter-only scheme, which makes narrowband comparisons exact and
// ensures the first digital equivalent has zero coupling violation.
HybridBeamformer initialize_beam(const ChannelSet &H, const ScenarioConfig &cfg,
                                 BeamArch arch, bool include_common, std::uint64_t seed);

} // namespace nfbf

#endif
