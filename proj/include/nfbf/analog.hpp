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

#ifndef NFBF_ANALOG_HPP
#define NFBF_ANALOG_HPP

#include <Eigen/Dense>
#include <vector>

#include "nfbf/beamformer.hpp"
#include "nfbf/rates.hpp"

namespace nfbf
{

// Precomputed delay search grid: S points covering [0, t_max] including
// both endpoints, with the phase table exp(-j 2 pi f_m t_s) shared by every
// delay update.
struct DelayGrid
{
    Eigen::VectorXd t;      // S
    Eigen::MatrixXcd phase; // S x M

    DelayGrid(double t_max_s, int points, const std::vector<double> &freqs_hz);

    // Index of the grid maximizer of sum_m Re(c_m exp(-j 2 pi f_m t)), ties
    // broken toward the smallest delay.
    int best_index(const Eigen::VectorXcd &c) const;
};

// Unconstrained-frequency-response auxiliaries G_m that stand in for the
// analog composite F T_m while it is being optimized.
struct AnalogAuxiliary
{
    std::vector<Eigen::MatrixXcd> G; // per m: N x A
};

// Closed-form auxiliary update: G_m = (P_m W_m' + (1/rho) F T_m)
// (W_m W_m' + (1/rho) I)^{-1}, the minimizer of ||P - G W||^2 +
// (1/rho)||G - F T||^2 over G.
AnalogAuxiliary update_G(const DigitalEquivalent &P, const HybridBeamformer &beam,
                         const std::vector<double> &freqs_hz, double rho_tilde);

// Per-group phase alignment: with delays fixed, each phase-shifter entry i
// of group (a, q) is set to arg(sum_m g_i exp(j 2 pi f_m t)), the exact
// maximizer of the correlation with the auxiliary columns. A zero
// accumulated coefficient keeps the previous phase.
void update_F(HybridBeamformer &beam, const AnalogAuxiliary &aux,
              const std::vector<double> &freqs_hz);

// Per-group delay update by exhaustive search over the grid; exact on the
// grid, ties toward the smallest delay.
void update_T(HybridBeamformer &beam, const AnalogAuxiliary &aux,
              const std::vector<double> &freqs_hz, const DelayGrid &grid);

// Objective of the analog penalty subproblem:
// sum_m ||P_m - G_m W_m||^2 + (1/rho)||G_m - F T_m||^2.
double analog_objective(const DigitalEquivalent &P, const HybridBeamformer &beam,
                        const AnalogAuxiliary &aux, const std::vector<double> &freqs_hz,
                        double rho_tilde);

// Coupling distance sum_m ||G_m - F T_m||^2 and its normalizer sum ||G||^2.
double analog_closure_gap(const HybridBeamformer &beam, const AnalogAuxiliary &aux,
                          const std::vector<double> &freqs_hz);

struct AnalogOptions
{
    double rho_tilde0 = 100.0;
    double alpha = 0.5;
    double xi2 = 1e-5;          // relative objective decrement threshold
    double closure_rel = 1e-6;  // relative coupling target
    int inner_max = 100;
    int outer_max = 30;
    bool update_delays = true;  // false pins every delay (phase-shifter-only mode)
};

struct AnalogResult
{
    int outer_iters = 0;
    int inner_iters = 0;  // total across penalty levels
    double closure = 0.0; // terminal relative coupling gap
    bool converged = false;
};

// Fully connected analog design: alternate the G / phase / delay updates
// until the objective decrement falls under xi2, then tighten the penalty
// (rho *= alpha) and repeat until the auxiliary has closed onto the
// implementable set. Updates beam phases and delays in place; W is fixed.
AnalogResult optimize_analog_fc(const DigitalEquivalent &P, HybridBeamformer &beam,
                                const std::vector<double> &freqs_hz, const DelayGrid &grid,
                                const AnalogOptions &opt);

} // namespace nfbf

#endif
