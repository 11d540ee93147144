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

#ifndef NFBF_SUBCONNECTED_HPP
#define NFBF_SUBCONNECTED_HPP

#include <Eigen/Dense>
#include <vector>

#include "nfbf/analog.hpp"
#include "nfbf/beamformer.hpp"
#include "nfbf/rates.hpp"

namespace nfbf
{

// Correlation coefficients of the block-diagonal analog problem. With the
// sub-connected pattern the coupling objective decomposes per sub-array:
//   sum_m ||P_m - F T_m W_m||^2
//     = eta - 2 sum_{m,a,q} Re(psi' f exp(-j 2 pi f_m t)),
// where psi_{m,a,q} is the q-th slice of P_m's sub-array-a rows multiplied
// by the conjugated a-th row of W_m, and eta collects the f/t-independent
// power terms. Stacking the slices per subcarrier gives one N-vector.
struct PsiCoeffs
{
    std::vector<Eigen::VectorXcd> psi; // per m: length N
    double eta = 0.0;                  // sum_m (||P_m||^2 + (N/A) ||W_m||^2)
};

PsiCoeffs compute_psi(const DigitalEquivalent &P, const HybridBeamformer &beam,
                      const SubArrayMap &map);

// Coupling objective evaluated through the decomposition; matches the
// direct Frobenius computation to numerical precision.
double subconnected_objective(const PsiCoeffs &coeffs, const HybridBeamformer &beam,
                              const std::vector<double> &freqs_hz);

// Phase and delay updates, mirroring the fully connected rules with psi in
// place of the auxiliary columns.
void update_f_sub(HybridBeamformer &beam, const PsiCoeffs &coeffs,
                  const std::vector<double> &freqs_hz);
void update_t_sub(HybridBeamformer &beam, const PsiCoeffs &coeffs,
                  const std::vector<double> &freqs_hz, const DelayGrid &grid);

struct SubAnalogOptions
{
    double xi = 1e-5;          // relative objective decrement threshold
    int max_iters = 100;
    bool update_delays = true;
};

// Sub-connected analog design: the block-diagonal structure couples phases
// and delays to the digital variables directly, so no auxiliary is needed
// and a plain phase/delay alternation minimizes the coupling objective.
AnalogResult optimize_analog_sub(const DigitalEquivalent &P, HybridBeamformer &beam,
                                 const std::vector<double> &freqs_hz, const DelayGrid &grid,
                                 const SubAnalogOptions &opt);

} // namespace nfbf

#endif
