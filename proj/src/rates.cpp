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

#include "nfbf/rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfbf
{

DigitalEquivalent effective_precoders(const HybridBeamformer &beam,
                                      const std::vector<double> &freqs_hz)
{
    DigitalEquivalent out;
    if (beam.W.size() != freqs_hz.size())
        throw std::invalid_argument("effective_precoders: combiner count does not match subcarriers");
    out.P.reserve(freqs_hz.size());
    for (std::size_t m = 0; m < freqs_hz.size(); ++m)
        out.P.push_back(effective_analog(beam, freqs_hz[m]) * beam.W[m]);
    return out;
}

RateReport received_powers(const ChannelSet &H, const DigitalEquivalent &P,
                           const Eigen::MatrixXd &noise_mw)
{
    const int M = H.subcarriers();
    const int K = H.users();
    if (P.subcarriers() != M)
        throw std::invalid_argument("received_powers: subcarrier count mismatch");
    if (noise_mw.rows() != K || noise_mw.cols() != M)
        throw std::invalid_argument("received_powers: noise matrix must be K x M");
    if ((noise_mw.array() <= 0.0).any())
        throw std::invalid_argument("received_powers: noise powers must be positive");

    RateReport rep;
    rep.Sc.resize(K, M);
    rep.Ic.resize(K, M);
    rep.Sp.resize(K, M);
    rep.Ip.resize(K, M);
    for (int m = 0; m < M; ++m)
    {
        if (P.P[m].rows() != H.antennas() || P.P[m].cols() != K + 1)
            throw std::invalid_argument("received_powers: precoder shape mismatch");
        // s(k, j) = h_k' p_j
        Eigen::MatrixXcd s = H.channels[m].adjoint() * P.P[m];
        Eigen::MatrixXd pw = s.cwiseAbs2();
        for (int k = 0; k < K; ++k)
        {
            double priv_total = pw.row(k).tail(K).sum();
            rep.Sc(k, m) = pw(k, 0);
            rep.Sp(k, m) = pw(k, k + 1);
            rep.Ip(k, m) = priv_total - pw(k, k + 1) + noise_mw(k, m);
            rep.Ic(k, m) = priv_total + noise_mw(k, m); // = Sp + Ip
        }
    }
    rep.gamma_c = rep.Sc.cwiseQuotient(rep.Ic);
    rep.gamma_p = rep.Sp.cwiseQuotient(rep.Ip);
    return rep;
}

RateReport received_powers(const ChannelSet &H, const DigitalEquivalent &P, double noise_mw)
{
    return received_powers(H, P,
                           Eigen::MatrixXd::Constant(H.users(), H.subcarriers(), noise_mw));
}

void rates_from_powers(RateReport &rep)
{
    rep.Rc = (rep.gamma_c.array() + 1.0).log() / std::log(2.0);
    rep.Rp = (rep.gamma_p.array() + 1.0).log() / std::log(2.0);
    rep.common_cap = rep.Rc.colwise().minCoeff().transpose();
}

void attach_allocation(RateReport &rep, const RateAllocation &alloc)
{
    rep.user_rate = (alloc.C + rep.Rp).rowwise().sum();
    rep.min_rate = rep.user_rate.minCoeff();
    rep.sum_rate = rep.user_rate.sum();
    rep.has_allocation = true;
}

RateAllocation allocate_common_rates(const Eigen::VectorXd &caps, const Eigen::MatrixXd &Rp,
                                     const QcqpOptions &opt)
{
    const int K = int(Rp.rows());
    const int M = int(Rp.cols());
    if (caps.size() != M)
        throw std::invalid_argument("allocate_common_rates: cap count must match subcarriers");

    RateAllocation alloc;
    alloc.C = Eigen::MatrixXd::Zero(K, M);

    // Subcarriers without usable cap contribute nothing and would leave the
    // LP with an empty interior, so they are fixed at zero up front.
    std::vector<int> active;
    for (int m = 0; m < M; ++m)
        if (caps(m) > 1e-12)
            active.push_back(m);

    if (active.empty() || K == 1)
    {
        if (K == 1)
            for (int m : active)
                alloc.C(0, m) = caps(m);
        alloc.r_common = (alloc.C + Rp).rowwise().sum().minCoeff();
        return alloc;
    }

    // Variables: C(k, m) for active m, then the max-min auxiliary r.
    const int Ma = int(active.size());
    const int n = K * Ma + 1;
    auto cidx = [&](int k, int j) { return k * Ma + j; };
    const int ridx = n - 1;

    QcqpProblem lp;
    lp.objective = QuadExpr(n);
    lp.objective.lin = Eigen::VectorXd::Zero(n);
    lp.objective.lin(ridx) = -1.0; // maximize r

    // r - sum_m (C(k, m) + Rp(k, m)) <= 0 for each user.
    for (int k = 0; k < K; ++k)
    {
        QuadExpr con(n);
        con.lin = Eigen::VectorXd::Zero(n);
        con.lin(ridx) = 1.0;
        for (int j = 0; j < Ma; ++j)
            con.lin(cidx(k, j)) = -1.0;
        con.cst = -Rp.row(k).sum();
        lp.constraints.push_back(std::move(con));
    }
    // sum_k C(k, m) <= cap_m
    for (int j = 0; j < Ma; ++j)
    {
        QuadExpr con(n);
        con.lin = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < K; ++k)
            con.lin(cidx(k, j)) = 1.0;
        con.cst = -caps(active[j]);
        lp.constraints.push_back(std::move(con));
    }
    // C >= 0
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < Ma; ++j)
        {
            QuadExpr con(n);
            con.lin = Eigen::VectorXd::Zero(n);
            con.lin(cidx(k, j)) = -1.0;
            lp.constraints.push_back(std::move(con));
        }

    // Start from the strictly interior equal split.
    Eigen::VectorXd x0(n);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < Ma; ++j)
            x0(cidx(k, j)) = 0.5 * caps(active[j]) / K;
    double r0 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k)
    {
        double total = Rp.row(k).sum();
        for (int j = 0; j < Ma; ++j)
            total += x0(cidx(k, j));
        r0 = std::min(r0, total);
    }
    x0(ridx) = r0 - 1e-3;

    QcqpSolution sol = solve_qcqp(lp, x0, opt);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < Ma; ++j)
            alloc.C(k, active[j]) = std::max(0.0, sol.x(cidx(k, j)));

    // Clip any solver-tolerance overshoot of a cap so the allocation is
    // exactly feasible for downstream checks.
    for (int j = 0; j < Ma; ++j)
    {
        double total = alloc.C.col(active[j]).sum();
        if (total > caps(active[j]) && total > 0.0)
            alloc.C.col(active[j]) *= caps(active[j]) / total;
    }
    alloc.r_common = (alloc.C + Rp).rowwise().sum().minCoeff();
    return alloc;
}

double evaluate_max_min(const ChannelSet &H, const HybridBeamformer &beam,
                        const RateAllocation &alloc, double noise_mw)
{
    DigitalEquivalent P = effective_precoders(beam, H.freqs_hz);
    RateReport rep = received_powers(H, P, noise_mw);
    rates_from_powers(rep);

    if ((alloc.C.array() < -1e-9).any())
        throw std::invalid_argument("evaluate_max_min: negative common-rate share");
    for (int m = 0; m < H.subcarriers(); ++m)
        if (alloc.C.col(m).sum() > rep.common_cap(m) + 1e-9)
            throw std::invalid_argument("evaluate_max_min: allocation exceeds a common-rate cap");

    attach_allocation(rep, alloc);
    return rep.min_rate;
}

} // namespace nfbf
