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

#include <cmath>

#include <doctest.h>

#include "nfbf/qcqp.hpp"
#include "nfbf/rng.hpp"

using namespace nfbf;

namespace
{

// Assembles the full Hessian of a structured expression the slow way, as an
// independent reference for the incremental accessors.
Eigen::MatrixXd dense_hessian(const QuadExpr &e)
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(e.n, e.n);
    if (e.diag.size())
        A.diagonal() += e.diag;
    for (const auto &t : e.terms)
    {
        int len = int(t.v.size());
        A.block(t.offset, t.offset, len, len) += t.w * t.v * t.v.transpose();
    }
    if (e.dense.size())
        A += e.dense;
    return A;
}

QuadExpr random_expr(int n, Rng &rng, bool with_dense)
{
    QuadExpr e(n);
    e.diag = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        e.diag(i) = rng.uniform(0.1, 2.0);
    int terms = 1 + int(rng.uniform() * 3);
    for (int t = 0; t < terms; ++t)
    {
        QuadExpr::Rank1 r;
        int len = 1 + int(rng.uniform() * n);
        r.offset = int(rng.uniform() * (n - len + 1));
        r.w = rng.uniform(0.0, 1.5);
        r.v = Eigen::VectorXd::Zero(len);
        for (int i = 0; i < len; ++i)
            r.v(i) = rng.uniform(-1, 1);
        e.terms.push_back(std::move(r));
    }
    if (with_dense)
    {
        Eigen::MatrixXd B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                B(i, j) = rng.uniform(-1, 1);
        e.dense = B.transpose() * B;
    }
    e.lin = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        e.lin(i) = rng.uniform(-1, 1);
    e.cst = rng.uniform(-1, 1);
    return e;
}

// Stationarity, feasibility and complementarity measured from scratch with
// dense algebra, bypassing the solver's own certificate fields.
void check_kkt(const QcqpProblem &prob, const QcqpSolution &sol, double tol)
{
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(prob.objective.n);
    prob.objective.add_gradient(sol.x, grad);
    double scale = 1.0 + grad.lpNorm<Eigen::Infinity>();
    for (std::size_t i = 0; i < prob.constraints.size(); ++i)
        prob.constraints[i].add_gradient(sol.x, grad, sol.lambda(int(i)));
    CHECK(grad.lpNorm<Eigen::Infinity>() <= tol * scale);

    for (std::size_t i = 0; i < prob.constraints.size(); ++i)
    {
        double g = prob.constraints[i].value(sol.x);
        CHECK(g <= tol);
        CHECK(sol.lambda(int(i)) >= -1e-12);
        CHECK(sol.lambda(int(i)) * std::abs(g) <= tol * scale);
    }
}

} // namespace

TEST_SUITE("qcqp")
{
    TEST_CASE("structured expressions agree with dense reference algebra")
    {
        Rng rng(7);
        for (int trial = 0; trial < 30; ++trial)
        {
            int n = 2 + int(rng.uniform() * 5);
            QuadExpr e = random_expr(n, rng, trial % 2 == 0);
            Eigen::MatrixXd A = dense_hessian(e);
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i)
                x(i) = rng.uniform(-2, 2);

            double want = 0.5 * x.dot(A * x) + e.lin.dot(x) + e.cst;
            CHECK(e.value(x) == doctest::Approx(want).epsilon(1e-12));

            Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
            e.add_gradient(x, g, 0.75);
            Eigen::VectorXd gw = 0.75 * (A * x + e.lin);
            CHECK((g - gw).lpNorm<Eigen::Infinity>() < 1e-12);

            Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
            e.add_hessian(H, -2.0);
            CHECK((H + 2.0 * A).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }

    TEST_CASE("gradient matches central finite differences")
    {
        Rng rng(11);
        QuadExpr e = random_expr(4, rng, true);
        Eigen::VectorXd x(4);
        for (int i = 0; i < 4; ++i)
            x(i) = rng.uniform(-1, 1);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
        e.add_gradient(x, g);
        const double h = 1e-6;
        for (int i = 0; i < 4; ++i)
        {
            Eigen::VectorXd xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            double fd = (e.value(xp) - e.value(xm)) / (2 * h);
            CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
        }
    }

    TEST_CASE("scalar truncated-minimum family is solved to solver tolerance")
    {
        // minimize 0.5 x^2 - a x subject to x <= b has the solution min(a, b).
        for (double a : {-2.0, -0.5, 0.0, 0.7, 2.0})
            for (double b : {-1.0, 0.0, 0.5, 3.0})
            {
                QcqpProblem prob;
                prob.objective = QuadExpr(1);
                prob.objective.diag = Eigen::VectorXd::Ones(1);
                prob.objective.lin = Eigen::VectorXd::Constant(1, -a);
                QuadExpr con(1);
                con.lin = Eigen::VectorXd::Ones(1);
                con.cst = -b;
                prob.constraints.push_back(con);

                QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Zero(1));
                CHECK(sol.cert.certified);
                double want = std::min(a, b);
                double fstar = 0.5 * want * want - a * want;
                CHECK(prob.objective.value(sol.x) <= fstar + 1e-6 * (1.0 + std::abs(fstar)));
                // At a == b the constraint is weakly active (zero multiplier),
                // where KKT residuals only pin the iterate to sqrt(tol).
                double xtol = (a == b) ? 5e-4 : 1e-6 * (1.0 + std::abs(want));
                CHECK(std::abs(sol.x(0) - want) <= xtol);
            }
    }

    TEST_CASE("projection onto a half-plane reproduces the hand solution")
    {
        // minimize 0.5[(x-1)^2 + (y-2)^2] s.t. x + y <= 2, x >= 0, y >= 0.
        QcqpProblem prob;
        prob.objective = QuadExpr(2);
        prob.objective.diag = Eigen::VectorXd::Ones(2);
        prob.objective.lin = Eigen::VectorXd(2);
        prob.objective.lin << -1.0, -2.0;
        prob.objective.cst = 0.5 * (1.0 + 4.0);

        QuadExpr sum(2);
        sum.lin = Eigen::VectorXd::Ones(2);
        sum.cst = -2.0;
        prob.constraints.push_back(sum);
        for (int i = 0; i < 2; ++i)
        {
            QuadExpr pos(2);
            pos.lin = Eigen::VectorXd::Zero(2);
            pos.lin(i) = -1.0;
            prob.constraints.push_back(pos);
        }

        QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Zero(2));
        CHECK(sol.cert.certified);
        CHECK(sol.x(0) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(sol.x(1) == doctest::Approx(1.5).epsilon(1e-6));
        CHECK(sol.objective == doctest::Approx(0.25).epsilon(1e-6));
        CHECK(sol.lambda(0) == doctest::Approx(0.5).epsilon(1e-5));
        CHECK(sol.lambda(1) <= 1e-6);
        CHECK(sol.lambda(2) <= 1e-6);
        check_kkt(prob, sol, 1e-6);
    }

    TEST_CASE("the zero-curvature case degrades to a certified LP")
    {
        // minimize -x - 2y over the unit box: optimum (1, 1), value -3.
        QcqpProblem prob;
        prob.objective = QuadExpr(2);
        prob.objective.lin = Eigen::VectorXd(2);
        prob.objective.lin << -1.0, -2.0;
        for (int i = 0; i < 2; ++i)
        {
            QuadExpr hi(2);
            hi.lin = Eigen::VectorXd::Zero(2);
            hi.lin(i) = 1.0;
            hi.cst = -1.0;
            prob.constraints.push_back(hi);
            QuadExpr lo(2);
            lo.lin = Eigen::VectorXd::Zero(2);
            lo.lin(i) = -1.0;
            prob.constraints.push_back(lo);
        }

        QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Constant(2, 0.5));
        CHECK(sol.cert.certified);
        CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(sol.objective == doctest::Approx(-3.0).epsilon(1e-6));
        CHECK(sol.lambda(0) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(sol.lambda(2) == doctest::Approx(2.0).epsilon(1e-5));
        check_kkt(prob, sol, 1e-6);
    }

    TEST_CASE("unconstrained problems reduce to one Newton solve")
    {
        Rng rng(13);
        for (int trial = 0; trial < 5; ++trial)
        {
            int n = 2 + trial;
            Eigen::MatrixXd B(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    B(i, j) = rng.uniform(-1, 1);
            QcqpProblem prob;
            prob.objective = QuadExpr(n);
            prob.objective.dense = B.transpose() * B + 0.5 * Eigen::MatrixXd::Identity(n, n);
            prob.objective.lin = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i)
                prob.objective.lin(i) = rng.uniform(-1, 1);

            QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Zero(n));
            CHECK(sol.cert.certified);
            Eigen::VectorXd want = -prob.objective.dense.ldlt().solve(prob.objective.lin);
            CHECK((sol.x - want).lpNorm<Eigen::Infinity>() < 1e-7 * (1.0 + want.norm()));
            CHECK(sol.lambda.size() == 0);
        }
    }

    TEST_CASE("random ball-constrained instances satisfy re-derived KKT conditions")
    {
        Rng rng(17);
        for (int trial = 0; trial < 40; ++trial)
        {
            int n = 2 + int(rng.uniform() * 5);
            int m = 1 + int(rng.uniform() * 5);

            QcqpProblem prob;
            Eigen::MatrixXd B(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    B(i, j) = rng.uniform(-1, 1);
            prob.objective = QuadExpr(n);
            prob.objective.dense = B.transpose() * B + 0.05 * Eigen::MatrixXd::Identity(n, n);
            prob.objective.lin = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i)
                prob.objective.lin(i) = rng.uniform(-2, 2);

            // Balls 0.5|x - c|^2 <= 0.5 r^2 with centers in the unit ball and
            // radii >= 1.5, so the origin is strictly interior to all of them.
            for (int i = 0; i < m; ++i)
            {
                Eigen::VectorXd c(n);
                for (int j = 0; j < n; ++j)
                    c(j) = rng.uniform(-1, 1);
                c /= std::max(1.0, c.norm());
                double r = rng.uniform(1.5, 2.5);
                QuadExpr con(n);
                con.diag = Eigen::VectorXd::Ones(n);
                con.lin = -c;
                con.cst = 0.5 * (c.squaredNorm() - r * r);
                prob.constraints.push_back(std::move(con));
            }

            QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Zero(n));
            CHECK(sol.cert.certified);
            check_kkt(prob, sol, 1e-5);
            CHECK(sol.objective == doctest::Approx(prob.objective.value(sol.x)).epsilon(1e-10));

            // Optimality against sampled feasible competitors. Points with
            // |y| <= 0.4 are feasible for every ball by the triangle bound.
            for (int comp = 0; comp < 20; ++comp)
            {
                Eigen::VectorXd y(n);
                for (int j = 0; j < n; ++j)
                    y(j) = rng.uniform(-1, 1);
                y *= 0.4 / std::max(1.0, y.norm());
                CHECK(prob.objective.value(sol.x) <=
                      prob.objective.value(y) + 1e-6 * (1.0 + std::abs(sol.objective)));
            }
        }
    }

    TEST_CASE("an infeasible start is absorbed by the slack reformulation")
    {
        QcqpProblem prob;
        prob.objective = QuadExpr(2);
        prob.objective.diag = Eigen::VectorXd::Ones(2);
        QuadExpr ball(2);
        ball.diag = Eigen::VectorXd::Ones(2);
        ball.lin = Eigen::VectorXd::Constant(2, -3.0); // center (3, 3)
        ball.cst = 0.5 * (18.0 - 1.0);                 // radius 1
        prob.constraints.push_back(ball);

        // Optimum: closest point of the ball to the origin, at distance
        // 3*sqrt(2) - 1 along the diagonal.
        QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Zero(2));
        CHECK(sol.cert.certified);
        double want = 3.0 - 1.0 / std::sqrt(2.0);
        CHECK(sol.x(0) == doctest::Approx(want).epsilon(1e-6));
        CHECK(sol.x(1) == doctest::Approx(want).epsilon(1e-6));
        check_kkt(prob, sol, 1e-6);
    }

    TEST_CASE("a one-iteration cap leaves the certificate unsigned")
    {
        QcqpProblem prob;
        prob.objective = QuadExpr(2);
        prob.objective.diag = Eigen::VectorXd::Ones(2);
        prob.objective.lin = Eigen::VectorXd::Constant(2, -10.0);
        QuadExpr con(2);
        con.lin = Eigen::VectorXd::Ones(2);
        con.cst = -1.0;
        prob.constraints.push_back(con);

        QcqpOptions opt;
        opt.max_iters = 1;
        QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Constant(2, 40.0), opt);
        CHECK_FALSE(sol.cert.certified);
        CHECK(sol.cert.iters <= 1);

        // The same problem certifies when given room.
        QcqpSolution full = solve_qcqp(prob, Eigen::VectorXd::Constant(2, 40.0));
        CHECK(full.cert.certified);
        CHECK(full.x(0) == doctest::Approx(0.5).epsilon(1e-6));
    }

    TEST_CASE("certificate fields reflect the independently measured residuals")
    {
        QcqpProblem prob;
        prob.objective = QuadExpr(3);
        prob.objective.diag = Eigen::VectorXd::Constant(3, 2.0);
        prob.objective.lin = Eigen::VectorXd::Constant(3, -1.0);
        QuadExpr con(3);
        con.diag = Eigen::VectorXd::Ones(3);
        con.cst = -0.02; // tight ball of radius 0.2 around the origin
        prob.constraints.push_back(con);

        QcqpSolution sol = solve_qcqp(prob, Eigen::VectorXd::Zero(3));
        REQUIRE(sol.cert.certified);
        CHECK(sol.cert.dual_residual <= 1e-7);
        CHECK(sol.cert.primal_residual <= 1e-7);
        CHECK(sol.cert.comp_gap <= 1e-7);

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
        prob.objective.add_gradient(sol.x, grad);
        prob.constraints[0].add_gradient(sol.x, grad, sol.lambda(0));
        CHECK(std::abs(grad.lpNorm<Eigen::Infinity>() - sol.cert.dual_residual) <= 1e-12);
    }
}
