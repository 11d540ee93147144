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

#include "nfbf/mm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfbf
{

static const double ln2 = std::log(2.0);

Auxiliaries compute_auxiliaries(const ChannelSet &H, const DigitalEquivalent &Pt,
                                double noise_mw)
{
    if (noise_mw <= 0.0)
        throw std::invalid_argument("compute_auxiliaries: noise power must be positive");
    const int K = H.users();
    const int M = H.subcarriers();

    Auxiliaries aux;
    aux.u_c.resize(K, M);
    aux.u_p.resize(K, M);
    aux.v_c.resize(K, M);
    aux.v_p.resize(K, M);
    for (int m = 0; m < M; ++m)
    {
        Eigen::MatrixXcd s = H.channels[m].adjoint() * Pt.P[m]; // K x (K+1)
        for (int k = 0; k < K; ++k)
        {
            double priv = s.row(k).tail(K).squaredNorm();
            double t_c = priv + std::norm(s(k, 0)) + noise_mw;
            double t_p = priv + noise_mw;
            aux.u_c(k, m) = s(k, 0) / t_c;
            aux.u_p(k, m) = s(k, k + 1) / t_p;
            aux.v_c(k, m) = 1.0 - std::norm(s(k, 0)) / t_c;
            aux.v_p(k, m) = 1.0 - std::norm(s(k, k + 1)) / t_p;
        }
    }
    return aux;
}

SurrogateSet build_surrogates(const ChannelSet &H, const Auxiliaries &aux, double noise_mw)
{
    const int K = H.users();
    const int M = H.subcarriers();

    SurrogateSet s;
    s.weight_c.resize(K, M);
    s.weight_p.resize(K, M);
    s.ycoef_c.resize(K, M);
    s.ycoef_p.resize(K, M);
    s.z_c.resize(K, M);
    s.z_p.resize(K, M);
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k)
        {
            auto fill = [&](const std::complex<double> &u, double v, double &w,
                            std::complex<double> &y, double &z) {
                w = std::norm(u) / (v * ln2);
                y = std::conj(u) / (v * ln2);
                z = -(noise_mw * std::norm(u) + 1.0) / (v * ln2) + 1.0 / ln2 -
                    std::log2(v);
            };
            fill(aux.u_c(k, m), aux.v_c(k, m), s.weight_c(k, m), s.ycoef_c(k, m), s.z_c(k, m));
            fill(aux.u_p(k, m), aux.v_p(k, m), s.weight_p(k, m), s.ycoef_p(k, m), s.z_p(k, m));
        }
    return s;
}

double surrogate_value(const SurrogateSet &s, const ChannelSet &H, const DigitalEquivalent &P,
                       int k, int m, bool common)
{
    const int K = H.users();
    Eigen::RowVectorXcd hp = H.channels[m].col(k).adjoint() * P.P[m]; // h_k' p_j, j = 0..K
    if (common)
        return -s.weight_c(k, m) * hp.squaredNorm() +
               2.0 * (s.ycoef_c(k, m) * hp(0)).real() + s.z_c(k, m);
    return -s.weight_p(k, m) * hp.tail(K).squaredNorm() +
           2.0 * (s.ycoef_p(k, m) * hp(k + 1)).real() + s.z_p(k, m);
}

Eigen::MatrixXcd surrogate_matrix(const SurrogateSet &s, const ChannelSet &H, int k, int m,
                                  bool common)
{
    const Eigen::VectorXcd h = H.channels[m].col(k);
    double w = common ? s.weight_c(k, m) : s.weight_p(k, m);
    return -w * (h * h.adjoint());
}

// --- convex instance -----------------------------------------------------

int ConvexInstance::block_offset(int m) const
{
    int off = 0;
    for (int i = 0; i < m; ++i)
        off += 2 * int(basis[i].cols()) * columns();
    return off;
}

int ConvexInstance::col_offset(int m, int col) const
{
    return block_offset(m) + col * 2 * int(basis[m].cols());
}

int ConvexInstance::c_offset() const
{
    return block_offset(M);
}

int ConvexInstance::r_offset() const
{
    return c_offset() + (include_common ? K * M : 0);
}

int ConvexInstance::dim() const
{
    return r_offset() + 1;
}

namespace
{

// Real interleaved (re, im) image of a complex vector.
Eigen::VectorXd interleave(const Eigen::VectorXcd &v)
{
    Eigen::VectorXd r(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        r(2 * i) = v(i).real();
        r(2 * i + 1) = v(i).imag();
    }
    return r;
}

// |v' zeta|^2 in the interleaved representation splits into two rank-one
// forms with these vectors.
void rank1_pair(const Eigen::VectorXcd &v, Eigen::VectorXd &vr, Eigen::VectorXd &vi)
{
    vr.resize(2 * v.size());
    vi.resize(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        vr(2 * i) = v(i).real();
        vr(2 * i + 1) = v(i).imag();
        vi(2 * i) = -v(i).imag();
        vi(2 * i + 1) = v(i).real();
    }
}

// Adds the gradient coefficients of scale * 2 Re(c * (v' zeta)) to lin.
void add_linear_term(Eigen::VectorXd &lin, int offset, const std::complex<double> &c,
                     const Eigen::VectorXcd &v, double scale)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        std::complex<double> u = c * std::conj(v(i));
        lin(offset + 2 * i) += scale * 2.0 * u.real();
        lin(offset + 2 * i + 1) -= scale * 2.0 * u.imag();
    }
}

double penalty_distance(const DigitalEquivalent &P, const DigitalEquivalent *targets)
{
    if (!targets)
        return 0.0;
    double pen = 0.0;
    for (int m = 0; m < P.subcarriers(); ++m)
        pen += (P.P[m] - targets->P[m]).squaredNorm();
    return pen;
}

} // namespace

QcqpProblem ConvexInstance::build_qcqp() const
{
    const int n = dim();
    const int cols = columns();
    QcqpProblem prob;

    prob.objective = QuadExpr(n);
    prob.objective.lin = Eigen::VectorXd::Zero(n);
    prob.objective.lin(r_offset()) = -1.0;
    if (rho_inv > 0.0)
    {
        prob.objective.diag = Eigen::VectorXd::Zero(n);
        prob.objective.diag.segment(0, c_offset()).setConstant(2.0 * rho_inv);
        for (int m = 0; m < M; ++m)
            for (int c = 0; c < cols; ++c)
            {
                int pcol = include_common ? c : c + 1;
                int D = int(basis[m].cols());
                prob.objective.lin.segment(col_offset(m, c), 2 * D) -=
                    2.0 * rho_inv * interleave(qred[m].col(pcol));
                prob.objective.cst += rho_inv * qred[m].col(pcol).squaredNorm();
            }
    }

    // Per-subcarrier power budget.
    for (int m = 0; m < M; ++m)
    {
        QuadExpr con(n);
        con.diag = Eigen::VectorXd::Zero(n);
        con.diag.segment(block_offset(m), 2 * int(basis[m].cols()) * cols).setConstant(2.0);
        con.cst = -p_th_mw;
        prob.constraints.push_back(std::move(con));
    }

    Eigen::VectorXd vr, vi;
    auto add_quad = [&](QuadExpr &con, int m, const Eigen::VectorXcd &v, double w,
                        bool private_only) {
        rank1_pair(v, vr, vi);
        int first = (private_only && include_common) ? 1 : 0;
        for (int c = first; c < cols; ++c)
        {
            con.terms.push_back({2.0 * w, col_offset(m, c), vr});
            con.terms.push_back({2.0 * w, col_offset(m, c), vi});
        }
    };

    // Common-rate caps: sum_k' C(k', m) - f_c(k, m) <= 0.
    if (include_common)
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
            {
                QuadExpr con(n);
                con.lin = Eigen::VectorXd::Zero(n);
                add_quad(con, m, hred[m].col(k), surr.weight_c(k, m), false);
                add_linear_term(con.lin, col_offset(m, 0), surr.ycoef_c(k, m), hred[m].col(k),
                                -1.0);
                for (int kk = 0; kk < K; ++kk)
                    con.lin(c_offset() + kk * M + m) += 1.0;
                con.cst = -surr.z_c(k, m);
                prob.constraints.push_back(std::move(con));
            }

    // Max-min coupling: r - sum_m (C(k, m) + f_p(k, m)) <= 0.
    for (int k = 0; k < K; ++k)
    {
        QuadExpr con(n);
        con.lin = Eigen::VectorXd::Zero(n);
        con.lin(r_offset()) = 1.0;
        for (int m = 0; m < M; ++m)
        {
            int anchor = include_common ? k + 1 : k;
            add_quad(con, m, hred[m].col(k), surr.weight_p(k, m), true);
            add_linear_term(con.lin, col_offset(m, anchor), surr.ycoef_p(k, m), hred[m].col(k),
                            -1.0);
            if (include_common)
                con.lin(c_offset() + k * M + m) -= 1.0;
            con.cst -= surr.z_p(k, m);
        }
        prob.constraints.push_back(std::move(con));
    }

    // C >= 0
    if (include_common)
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
            {
                QuadExpr con(n);
                con.lin = Eigen::VectorXd::Zero(n);
                con.lin(c_offset() + k * M + m) = -1.0;
                prob.constraints.push_back(std::move(con));
            }

    return prob;
}

Eigen::VectorXd ConvexInstance::pack(const DigitalEquivalent &P,
                                     const RateAllocation &alloc) const
{
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
    for (int m = 0; m < M; ++m)
    {
        int D = int(basis[m].cols());
        for (int c = 0; c < columns(); ++c)
        {
            int pcol = include_common ? c : c + 1;
            Eigen::VectorXcd zeta = basis[m].adjoint() * P.P[m].col(pcol);
            x.segment(col_offset(m, c), 2 * D) = interleave(zeta);
        }
    }
    if (include_common)
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
                x(c_offset() + k * M + m) = alloc.C(k, m);
    x(r_offset()) = alloc.r_common;
    return x;
}

void ConvexInstance::unpack(const Eigen::VectorXd &x, DigitalEquivalent &P,
                            RateAllocation &alloc) const
{
    P.P.assign(M, Eigen::MatrixXcd());
    for (int m = 0; m < M; ++m)
    {
        int N = int(basis[m].rows());
        int D = int(basis[m].cols());
        P.P[m] = Eigen::MatrixXcd::Zero(N, K + 1);
        for (int c = 0; c < columns(); ++c)
        {
            int pcol = include_common ? c : c + 1;
            Eigen::VectorXcd zeta(D);
            for (int i = 0; i < D; ++i)
                zeta(i) = {x(col_offset(m, c) + 2 * i), x(col_offset(m, c) + 2 * i + 1)};
            P.P[m].col(pcol) = basis[m] * zeta;
        }
    }
    alloc.C = Eigen::MatrixXd::Zero(K, M);
    if (include_common)
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
                alloc.C(k, m) = x(c_offset() + k * M + m);
    alloc.r_common = x(r_offset());
}

double ConvexInstance::objective_value(const DigitalEquivalent &P,
                                       const RateAllocation &alloc) const
{
    double pen = 0.0;
    if (rho_inv > 0.0)
        for (int m = 0; m < M; ++m)
            for (int c = 0; c < columns(); ++c)
            {
                int pcol = include_common ? c : c + 1;
                pen += (P.P[m].col(pcol) - basis[m] * qred[m].col(pcol)).squaredNorm();
            }
    return alloc.r_common - rho_inv * pen;
}

ConvexInstance build_instance(const ChannelSet &H, const DigitalEquivalent *targets,
                              double rho_inv, const DigitalEquivalent &Pt, double noise_mw,
                              double p_th_mw, bool include_common)
{
    if (rho_inv > 0.0 && !targets)
        throw std::invalid_argument("build_instance: penalty weight requires targets");
    if (rho_inv < 0.0)
        throw std::invalid_argument("build_instance: penalty weight must be nonnegative");

    ConvexInstance inst;
    inst.K = H.users();
    inst.M = H.subcarriers();
    inst.include_common = include_common;
    inst.rho_inv = rho_inv;
    inst.noise_mw = noise_mw;
    inst.p_th_mw = p_th_mw;

    Auxiliaries aux = compute_auxiliaries(H, Pt, noise_mw);
    inst.surr = build_surrogates(H, aux, noise_mw);

    const int N = H.antennas();
    for (int m = 0; m < inst.M; ++m)
    {
        int extra = (rho_inv > 0.0) ? inst.columns() : 0;
        Eigen::MatrixXcd span(N, inst.K + extra);
        span.leftCols(inst.K) = H.channels[m];
        if (extra)
            for (int c = 0; c < inst.columns(); ++c)
            {
                int pcol = include_common ? c : c + 1;
                span.col(inst.K + c) = targets->P[m].col(pcol);
            }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(span);
        int rank = std::max<int>(1, int(qr.rank()));
        Eigen::MatrixXcd basis =
            qr.householderQ() * Eigen::MatrixXcd::Identity(N, rank);
        inst.hred.push_back(basis.adjoint() * H.channels[m]);
        if (rho_inv > 0.0)
        {
            Eigen::MatrixXcd qv = Eigen::MatrixXcd::Zero(rank, inst.K + 1);
            for (int c = 0; c < inst.columns(); ++c)
            {
                int pcol = include_common ? c : c + 1;
                qv.col(pcol) = basis.adjoint() * targets->P[m].col(pcol);
            }
            inst.qred.push_back(std::move(qv));
            inst.target_norm2 += targets->P[m].squaredNorm();
        }
        inst.basis.push_back(std::move(basis));
    }
    return inst;
}

ConvexResult solve_convex(const ConvexInstance &inst, const DigitalEquivalent &start_P,
                          const RateAllocation &start_alloc, const QcqpOptions &opt)
{
    ConvexResult res;

    // Degenerate power budget: the precoders are forced to zero and only the
    // common-rate split remains.
    if (inst.p_th_mw <= 0.0)
    {
        res.P.P.assign(inst.M, Eigen::MatrixXcd::Zero(int(inst.basis[0].rows()), inst.K + 1));
        Eigen::VectorXd caps = Eigen::VectorXd::Zero(inst.M);
        if (inst.include_common)
            for (int m = 0; m < inst.M; ++m)
                caps(m) = std::max(0.0, inst.surr.z_c.col(m).minCoeff());
        res.alloc = allocate_common_rates(caps, inst.surr.z_p, opt);
        res.objective = res.alloc.r_common;
        res.cert.certified = true;
        return res;
    }

    QcqpProblem prob = inst.build_qcqp();
    Eigen::VectorXd x0 = inst.pack(start_P, start_alloc);
    QcqpSolution sol = solve_qcqp(prob, x0, opt);
    inst.unpack(sol.x, res.P, res.alloc);
    res.objective = inst.objective_value(res.P, res.alloc);
    res.cert = sol.cert;
    return res;
}

DigitalResult optimize_digital(const ChannelSet &H, const DigitalEquivalent *targets,
                               const DigitalEquivalent &init_P, double noise_mw,
                               const DigitalOptions &opt)
{
    DigitalResult res;
    const int K = H.users();

    // Project the start onto the representable span; components outside it
    // cannot improve any rate and only add power and penalty.
    {
        ConvexInstance inst0 = build_instance(H, targets, opt.rho_inv, init_P, noise_mw,
                                              opt.p_th_mw, opt.include_common);
        RateAllocation dummy;
        dummy.C = Eigen::MatrixXd::Zero(K, H.subcarriers());
        inst0.unpack(inst0.pack(init_P, dummy), res.P, dummy);
    }

    auto evaluate = [&](const DigitalEquivalent &P, RateAllocation &alloc) {
        RateReport rep = received_powers(H, P, noise_mw);
        rates_from_powers(rep);
        if (opt.include_common)
            alloc = allocate_common_rates(rep.common_cap, rep.Rp, opt.solver);
        else
        {
            alloc.C = Eigen::MatrixXd::Zero(K, H.subcarriers());
            alloc.r_common = rep.Rp.rowwise().sum().minCoeff();
        }
        return alloc.r_common - opt.rho_inv * penalty_distance(P, targets);
    };

    double J = evaluate(res.P, res.alloc);
    res.trace.push_back(J);

    for (res.iters = 0; res.iters < opt.max_iters;)
    {
        ConvexInstance inst = build_instance(H, targets, opt.rho_inv, res.P, noise_mw,
                                             opt.p_th_mw, opt.include_common);
        ConvexResult step = solve_convex(inst, res.P, res.alloc, opt.solver);
        ++res.iters;

        // Accept only ascent steps; an exact subproblem solve cannot decrease
        // the objective, so a non-improving step marks convergence (or a solver
        // failure whose output must not contaminate the iterate).
        RateAllocation alloc_next;
        double J_next = evaluate(step.P, alloc_next);
        if (J_next <= J)
            break;
        res.P = step.P;
        res.alloc = alloc_next;
        res.certified = res.certified && step.cert.certified;
        res.trace.push_back(J_next);

        double gain = J_next - J;
        J = J_next;
        if (gain < opt.xi1)
            break;
    }
    res.objective = J;
    return res;
}

} // namespace nfbf
