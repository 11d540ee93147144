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

#ifndef NFBF_MM_HPP
#define NFBF_MM_HPP

#include <Eigen/Dense>
#include <vector>

#include "nfbf/qcqp.hpp"
#include "nfbf/rates.hpp"

namespace nfbf
{

// Expansion-point auxiliaries of the concave rate surrogates. For the
// common stream, u = h'p0 / T with T the total received power including
// noise, and v = 1 - conj(u) h'p0, which equals the interference share I/T
// and therefore always lies in (0, 1]. Private-stream entries exclude the
// common column from the total.
struct Auxiliaries
{
    Eigen::MatrixXcd u_c, u_p; // K x M
    Eigen::MatrixXd v_c, v_p;  // K x M
};

Auxiliaries compute_auxiliaries(const ChannelSet &H, const DigitalEquivalent &Pt,
                                double noise_mw);

// Coefficients of the quadratic minorant of each rate term:
//   f(P) = sum_j p_j' X p_j + 2 Re(ycoef h' p_anchor) + z,
// where the quadratic runs over the decodable-set columns (all K+1 for the
// common stream, the K private ones otherwise), X = -weight * h h' with
// weight = |u|^2 / (v ln2) >= 0, ycoef = conj(u) / (v ln2), and z collects
// the expansion-point constants including the noise term.
struct SurrogateSet
{
    Eigen::MatrixXd weight_c, weight_p;  // K x M, X = -weight * h h'
    Eigen::MatrixXcd ycoef_c, ycoef_p;   // K x M
    Eigen::MatrixXd z_c, z_p;            // K x M
};

SurrogateSet build_surrogates(const ChannelSet &H, const Auxiliaries &aux, double noise_mw);

// Surrogate value for one (user, subcarrier, stream). `common` selects the
// common-stream surrogate.
double surrogate_value(const SurrogateSet &s, const ChannelSet &H, const DigitalEquivalent &P,
                       int k, int m, bool common);

// Dense N x N matrix X of one surrogate, for structural checks (Hermitian,
// rank one, negative semidefinite).
Eigen::MatrixXcd surrogate_matrix(const SurrogateSet &s, const ChannelSet &H, int k, int m,
                                  bool common);

// One digital-block convex subproblem: maximize the common-rate auxiliary
// minus the penalty distance to the analog targets, subject to the
// surrogate rate constraints and the per-subcarrier power budget. The
// precoders are represented in the per-subcarrier orthonormal basis spanned
// by the channel columns and the target columns; components orthogonal to
// that span can only spend power and penalty, so the reduction is exact.
struct ConvexInstance
{
    int K = 0, M = 0;
    bool include_common = true;  // false drops the common column, C and caps
    double p_th_mw = 0.0;
    double rho_inv = 0.0;        // penalty weight 1/rho; 0 removes the penalty
    double noise_mw = 0.0;

    std::vector<Eigen::MatrixXcd> basis; // per m: N x D_m, orthonormal columns
    std::vector<Eigen::MatrixXcd> hred;  // per m: D_m x K
    std::vector<Eigen::MatrixXcd> qred;  // per m: D_m x (K+1), empty if rho_inv = 0
    double target_norm2 = 0.0;           // sum_m ||targets_m||^2
    SurrogateSet surr;

    int columns() const { return include_common ? K + 1 : K; }
    int dim() const;                          // real decision dimension
    int block_offset(int m) const;            // start of subcarrier m's block
    int col_offset(int m, int col) const;     // start of precoder column `col`
    int c_offset() const;                     // start of the C variables
    int r_offset() const;                     // index of the max-min auxiliary

    QcqpProblem build_qcqp() const;

    // Real decision vector from precoders (projected onto the basis) and an
    // allocation; inverse mapping back to matrices.
    Eigen::VectorXd pack(const DigitalEquivalent &P, const RateAllocation &alloc) const;
    void unpack(const Eigen::VectorXd &x, DigitalEquivalent &P, RateAllocation &alloc) const;

    // Objective of the original subproblem at a solution: r_common minus
    // rho_inv times the squared distance to the targets.
    double objective_value(const DigitalEquivalent &P, const RateAllocation &alloc) const;
};

// Builds the instance at expansion point Pt. `targets` are the analog
// composites F T_m W_m; pass nullptr together with rho_inv = 0 for the
// penalty-free (fully digital) problem.
ConvexInstance build_instance(const ChannelSet &H, const DigitalEquivalent *targets,
                              double rho_inv, const DigitalEquivalent &Pt, double noise_mw,
                              double p_th_mw, bool include_common);

struct ConvexResult
{
    DigitalEquivalent P;
    RateAllocation alloc;
    double objective = 0.0; // r_common - rho_inv * violation
    QcqpCertificate cert;
};

// Solves one instance from a warm start; the expansion point with its
// true-rate allocation is always feasible and is the intended start.
ConvexResult solve_convex(const ConvexInstance &inst, const DigitalEquivalent &start_P,
                          const RateAllocation &start_alloc, const QcqpOptions &opt = {});

struct DigitalOptions
{
    double rho_inv = 0.0;      // penalty weight; 0 for the fully digital bound
    double p_th_mw = 0.0;      // per-subcarrier power budget
    double xi1 = 1e-4;         // stop when the objective gain drops below this
    int max_iters = 50;
    bool include_common = true;
    QcqpOptions solver;
};

struct DigitalResult
{
    DigitalEquivalent P;
    RateAllocation alloc;        // feasible against true rates of P
    double objective = 0.0;      // true-rate max-min minus penalty
    int iters = 0;
    bool certified = true;
    std::vector<double> trace;   // objective after each iteration
};

// Iterative digital-precoder design: rebuild the surrogate expansion at the
// current point, solve the convex restriction, repeat until the gain in the
// true objective (max-min allocation value minus penalty) falls under xi1.
// Warm starts make the trace non-decreasing up to solver tolerance. init_P
// is projected onto the instance basis on entry; with targets present the
// projection can only reduce the penalty distance of representable points.
DigitalResult optimize_digital(const ChannelSet &H, const DigitalEquivalent *targets,
                               const DigitalEquivalent &init_P, double noise_mw,
                               const DigitalOptions &opt);

} // namespace nfbf

#endif
