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

#ifndef NFBF_QCQP_HPP
#define NFBF_QCQP_HPP

#include <Eigen/Dense>
#include <vector>

namespace nfbf
{

// Convex quadratic expression 0.5 x'Ax + b'x + c with the Hessian stored in
// structured form: a diagonal part plus weighted rank-one terms confined to
// index windows, with an optional dense part for irregular cases. The rate
// surrogates only ever produce diagonal and windowed rank-one curvature, so
// this representation keeps Newton assembly linear in the term count.
struct QuadExpr
{
    struct Rank1
    {
        double w = 0.0;       // A += w * v v' on the window
        int offset = 0;       // first index of the window
        Eigen::VectorXd v;    // window-local vector
    };

    int n = 0;
    Eigen::VectorXd diag;     // empty or length n
    std::vector<Rank1> terms;
    Eigen::MatrixXd dense;    // empty or n x n symmetric
    Eigen::VectorXd lin;      // empty or length n
    double cst = 0.0;

    explicit QuadExpr(int dim = 0) : n(dim) {}

    double value(const Eigen::VectorXd &x) const;

    // g += scale * (A x + lin)
    void add_gradient(const Eigen::VectorXd &x, Eigen::VectorXd &g, double scale = 1.0) const;

    // H += scale * A
    void add_hessian(Eigen::MatrixXd &H, double scale = 1.0) const;
};

struct QcqpOptions
{
    double tol = 1e-7;        // certificate tolerance (absolute)
    int max_iters = 100;
    double boundary = 0.995;  // fraction-to-the-boundary factor
};

struct QcqpCertificate
{
    double dual_residual = 0.0;   // || grad f0 + J' lambda ||_inf
    double primal_residual = 0.0; // max_i max(g_i(x), 0)
    double comp_gap = 0.0;        // sum_i lambda_i * |g_i(x)|
    int iters = 0;
    bool certified = false;       // all three measures within tol
};

struct QcqpSolution
{
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;   // one multiplier per inequality constraint
    double objective = 0.0;
    QcqpCertificate cert;
};

struct QcqpProblem
{
    QuadExpr objective;                 // convex (PSD Hessian)
    std::vector<QuadExpr> constraints;  // each convex, constraint(x) <= 0
};

// Primal-dual interior-point solver with a Mehrotra predictor-corrector
// step, for inequality-constrained convex QCQPs (covers LPs as the
// zero-curvature case). The start point need not be feasible; slacks absorb
// any initial violation. On success the returned multipliers satisfy the
// KKT conditions within opt.tol, which callers can re-verify independently
// from the certificate fields.
QcqpSolution solve_qcqp(const QcqpProblem &prob, const Eigen::VectorXd &x0,
                        const QcqpOptions &opt = {});

} // namespace nfbf

#endif
