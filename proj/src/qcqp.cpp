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

#include "nfbf/qcqp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfbf
{

double QuadExpr::value(const Eigen::VectorXd &x) const
{
    double val = cst;
    if (lin.size())
        val += lin.dot(x);
    if (diag.size())
        val += 0.5 * x.dot(diag.cwiseProduct(x));
    for (const Rank1 &t : terms)
    {
        double proj = t.v.dot(x.segment(t.offset, t.v.size()));
        val += 0.5 * t.w * proj * proj;
    }
    if (dense.size())
        val += 0.5 * x.dot(dense * x);
    return val;
}

void QuadExpr::add_gradient(const Eigen::VectorXd &x, Eigen::VectorXd &g, double scale) const
{
    if (lin.size())
        g += scale * lin;
    if (diag.size())
        g += scale * diag.cwiseProduct(x);
    for (const Rank1 &t : terms)
    {
        double proj = t.v.dot(x.segment(t.offset, t.v.size()));
        g.segment(t.offset, t.v.size()) += (scale * t.w * proj) * t.v;
    }
    if (dense.size())
        g += scale * (dense * x);
}

void QuadExpr::add_hessian(Eigen::MatrixXd &H, double scale) const
{
    if (diag.size())
        H.diagonal() += scale * diag;
    for (const Rank1 &t : terms)
        H.block(t.offset, t.offset, t.v.size(), t.v.size()) +=
            (scale * t.w) * (t.v * t.v.transpose());
    if (dense.size())
        H += scale * dense;
}

namespace
{

// Largest step in [0, 1] keeping v + a*dv >= (1 - boundary) * v.
double fraction_to_boundary(const Eigen::VectorXd &v, const Eigen::VectorXd &dv, double boundary)
{
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0)
            a = std::min(a, boundary * (-v(i) / dv(i)));
    return a;
}

} // namespace

QcqpSolution solve_qcqp(const QcqpProblem &prob, const Eigen::VectorXd &x0,
                        const QcqpOptions &opt)
{
    const int n = prob.objective.n;
    const int m = int(prob.constraints.size());
    if (x0.size() != n)
        throw std::invalid_argument("solve_qcqp: start point has wrong dimension");

    QcqpSolution sol;
    sol.x = x0;
    sol.lambda = Eigen::VectorXd::Zero(m);

    auto eval_constraints = [&](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        for (int i = 0; i < m; ++i)
            g(i) = prob.constraints[i].value(x);
    };
    auto eval_jacobian = [&](const Eigen::VectorXd &x, Eigen::MatrixXd &J) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i)
        {
            row.setZero();
            prob.constraints[i].add_gradient(x, row);
            J.row(i) = row;
        }
    };
    // Nonnegative least-squares fit of the multipliers on the near-active
    // constraints. Interior-point duals can jam on degenerate instances even
    // though the primal point is optimal; a direct stationarity fit then
    // recovers a valid certificate for the same point.
    auto repair_duals = [&](const Eigen::VectorXd &g) {
        Eigen::VectorXd grad_f = Eigen::VectorXd::Zero(n);
        prob.objective.add_gradient(sol.x, grad_f);
        double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
        std::vector<int> act;
        for (int i = 0; i < m; ++i)
            if (g(i) >= -std::max(1e3 * opt.tol, 1e-6 * scale))
                act.push_back(i);

        Eigen::VectorXd lam_fit;
        while (!act.empty())
        {
            Eigen::Index a = Eigen::Index(act.size());
            Eigen::MatrixXd A(n, a);
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n), nrm(a);
            for (Eigen::Index j = 0; j < a; ++j)
            {
                row.setZero();
                prob.constraints[act[std::size_t(j)]].add_gradient(sol.x, row);
                nrm(j) = std::max(row.norm(), 1e-300);
                A.col(j) = row / nrm(j);
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
            lam_fit = qr.solve(-grad_f);
            for (int pass = 0; pass < 2; ++pass)
                lam_fit += qr.solve(-(grad_f + A * lam_fit));
            lam_fit = lam_fit.cwiseQuotient(nrm);
            Eigen::Index worst;
            if (lam_fit.minCoeff(&worst) >= -1e-10)
                break;
            act.erase(act.begin() + worst);
        }
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
        for (std::size_t j = 0; j < act.size(); ++j)
            lam(act[j]) = std::max(0.0, lam_fit(Eigen::Index(j)));
        return lam;
    };

    auto residuals = [&](const Eigen::VectorXd &x, const Eigen::VectorXd &lam,
                         QcqpCertificate &cert) {
        Eigen::VectorXd g(m), rd = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i)
            g(i) = prob.constraints[i].value(x);
        prob.objective.add_gradient(x, rd);
        for (int i = 0; i < m; ++i)
            if (lam(i) != 0.0)
                prob.constraints[i].add_gradient(x, rd, lam(i));
        cert.dual_residual = rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0;
        cert.primal_residual = m ? std::max(0.0, g.maxCoeff()) : 0.0;
        cert.comp_gap = m ? lam.dot(g.cwiseAbs()) : 0.0;
        cert.certified = cert.dual_residual <= opt.tol && cert.primal_residual <= opt.tol &&
                         cert.comp_gap <= opt.tol && x.allFinite() && lam.allFinite();
    };

    // Newton polish of the active-set KKT system: with the near-active
    // constraints treated as equalities, a couple of steps on
    //   [H  Ja'] [dx ]   [-(grad f + Ja' lam)]
    //   [Ja  0 ] [dlam] = [-g_a              ]
    // (solved through the Schur complement of the regularized H) converge
    // quadratically and turn a nearly optimal interior point into one whose
    // certificate holds at machine precision.
    auto polish = [&](Eigen::VectorXd &x, Eigen::VectorXd &lam) {
        Eigen::VectorXd g(m);
        for (int i = 0; i < m; ++i)
            g(i) = prob.constraints[i].value(x);
        double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
        std::vector<int> act;
        for (int i = 0; i < m; ++i)
            if (g(i) >= -std::max(1e3 * opt.tol, 1e-6 * scale))
                act.push_back(i);
        const Eigen::Index a = Eigen::Index(act.size());
        if (a == 0)
            return;

        Eigen::MatrixXd H(n, n), Ja(a, n);
        Eigen::VectorXd ga(a), rd(n), row(n), dlam(a), dx(n);
        for (int pass = 0; pass < 3; ++pass)
        {
            for (Eigen::Index j = 0; j < a; ++j)
            {
                ga(j) = prob.constraints[act[std::size_t(j)]].value(x);
                row.setZero();
                prob.constraints[act[std::size_t(j)]].add_gradient(x, row);
                Ja.row(j) = row;
            }
            rd.setZero();
            prob.objective.add_gradient(x, rd);
            rd += Ja.transpose() * lam(act).eval();

            H.setZero();
            prob.objective.add_hessian(H);
            for (Eigen::Index j = 0; j < a; ++j)
                if (lam(act[std::size_t(j)]) > 0.0)
                    prob.constraints[act[std::size_t(j)]].add_hessian(
                        H, lam(act[std::size_t(j)]));
            H.diagonal().array() += 1e-11 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());

            Eigen::LDLT<Eigen::MatrixXd> hf(H.selfadjointView<Eigen::Lower>());
            if (hf.info() != Eigen::Success)
                return;
            Eigen::MatrixXd HiJt = hf.solve(Ja.transpose());
            Eigen::MatrixXd S = Ja * HiJt;
            S.diagonal().array() += 1e-13 * (1.0 + S.diagonal().cwiseAbs().maxCoeff());
            dlam = S.ldlt().solve(ga - HiJt.transpose() * rd);
            dx = -hf.solve(rd) - HiJt * dlam;
            if (!dx.allFinite() || !dlam.allFinite())
                return;
            x += dx;
            for (Eigen::Index j = 0; j < a; ++j)
                lam(act[std::size_t(j)]) += dlam(j);
        }
        lam = lam.cwiseMax(0.0);
    };

    auto finish = [&](int iters) {
        residuals(sol.x, sol.lambda, sol.cert);
        if (m && !sol.cert.certified && sol.x.allFinite())
        {
            Eigen::VectorXd g(m);
            eval_constraints(sol.x, g);

            Eigen::VectorXd lam = repair_duals(g);
            QcqpCertificate cert;
            residuals(sol.x, lam, cert);
            if (cert.certified ||
                (cert.dual_residual < sol.cert.dual_residual &&
                 cert.primal_residual <= std::max(sol.cert.primal_residual, opt.tol)))
            {
                sol.lambda = lam;
                sol.cert = cert;
            }

            if (!sol.cert.certified)
            {
                Eigen::VectorXd xp = sol.x, lp = sol.lambda;
                polish(xp, lp);
                residuals(xp, lp, cert);
                if (cert.certified)
                {
                    sol.x = xp;
                    sol.lambda = lp;
                    sol.cert = cert;
                }
            }
        }
        sol.cert.iters = iters;
        sol.objective = prob.objective.value(sol.x);
    };

    // Unconstrained convex quadratic: one Newton solve.
    if (m == 0)
    {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
        prob.objective.add_hessian(H);
        H.diagonal().array() += 1e-12;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        prob.objective.add_gradient(sol.x, rhs);
        sol.x -= Eigen::MatrixXd(H.selfadjointView<Eigen::Lower>()).ldlt().solve(rhs);
        finish(1);
        return sol;
    }

    Eigen::VectorXd g(m);
    eval_constraints(sol.x, g);
    Eigen::VectorXd s = (-g).cwiseMax(1e-4);
    Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);

    Eigen::MatrixXd J(m, n), M(n, n);
    Eigen::VectorXd grad_f(n), rd(n), rp(m), rc(m), rhs(n);
    Eigen::VectorXd dx(n), ds(m), dlam(m);

    int iter = 0;
    double best_res = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (; iter < opt.max_iters; ++iter)
    {
        eval_constraints(sol.x, g);
        eval_jacobian(sol.x, J);
        grad_f.setZero();
        prob.objective.add_gradient(sol.x, grad_f);

        rd = grad_f + J.transpose() * lam;
        rp = g + s;
        double gap = s.dot(lam);

        if (!rd.allFinite() || !rp.allFinite() || !std::isfinite(gap))
            break;
        if (rd.cwiseAbs().maxCoeff() <= opt.tol && rp.cwiseAbs().maxCoeff() <= opt.tol &&
            gap <= opt.tol)
        {
            sol.lambda = lam;
            finish(iter);
            return sol;
        }

        // Degenerate duals can freeze the dual residual with the primal side
        // fully converged and the step length pinned near zero; hand such
        // points to the certificate repair instead of spinning out the
        // iteration budget.
        if (rp.cwiseAbs().maxCoeff() <= opt.tol && gap <= opt.tol)
        {
            double res = rd.cwiseAbs().maxCoeff();
            if (res < 0.9 * best_res)
            {
                best_res = res;
                since_best = 0;
            }
            else if (++since_best >= 10)
                break;
        }

        double mu = gap / m;

        // Newton matrix with the slacks eliminated.
        M.setZero();
        prob.objective.add_hessian(M);
        for (int i = 0; i < m; ++i)
            if (lam(i) != 0.0)
                prob.constraints[i].add_hessian(M, lam(i));
        Eigen::VectorXd d = (lam.array() / s.array()).matrix();
        M.selfadjointView<Eigen::Lower>().rankUpdate(
            J.transpose() * d.cwiseSqrt().asDiagonal(), 1.0);

        double reg = 1e-12 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<Eigen::MatrixXd> ldlt;
        for (int attempt = 0; attempt < 5; ++attempt)
        {
            Eigen::MatrixXd Mreg = M;
            Mreg.diagonal().array() += reg;
            ldlt.compute(Mreg.selfadjointView<Eigen::Lower>());
            if (ldlt.info() == Eigen::Success && ldlt.isPositive())
                break;
            reg *= 1e3;
        }

        auto kkt_step = [&](const Eigen::VectorXd &rc_target) {
            rhs = -(rd + J.transpose() *
                             ((lam.cwiseProduct(rp) - rc_target).cwiseQuotient(s)));
            dx = ldlt.solve(rhs);
            ds = -rp - J * dx;
            dlam = (-rc_target - lam.cwiseProduct(ds)).cwiseQuotient(s);
        };

        // Predictor (affine scaling direction).
        rc = s.cwiseProduct(lam);
        kkt_step(rc);
        double a_aff = std::min(fraction_to_boundary(s, ds, opt.boundary),
                                fraction_to_boundary(lam, dlam, opt.boundary));
        double mu_aff = (s + a_aff * ds).dot(lam + a_aff * dlam) / m;
        double sigma = std::pow(std::min(1.0, std::max(0.0, mu_aff / mu)), 3.0);

        // Corrector with centering.
        rc = s.cwiseProduct(lam) + ds.cwiseProduct(dlam);
        rc.array() -= sigma * mu;
        kkt_step(rc);

        double a_p = fraction_to_boundary(s, ds, opt.boundary);
        double a_d = fraction_to_boundary(lam, dlam, opt.boundary);

        // Collapsing steps signal lost centrality; retry once with a strong
        // centering target on the same factorization.
        if (std::min(a_p, a_d) < 0.2 && sigma < 0.8)
        {
            rc = s.cwiseProduct(lam) + ds.cwiseProduct(dlam);
            rc.array() -= 0.8 * mu;
            kkt_step(rc);
            a_p = fraction_to_boundary(s, ds, opt.boundary);
            a_d = fraction_to_boundary(lam, dlam, opt.boundary);
        }
        if (!dx.allFinite() || !ds.allFinite() || !dlam.allFinite())
            break;

        sol.x += a_p * dx;
        s += a_p * ds;
        lam += a_d * dlam;
    }

    sol.lambda = lam;
    finish(iter);
    return sol;
}

} // namespace nfbf
