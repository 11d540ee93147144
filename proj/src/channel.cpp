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

#include "nfbf/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "nfbf/rng.hpp"

namespace nfbf
{

static constexpr double c_light = 299792458.0;
static constexpr double two_pi = 6.283185307179586476925286766559;

ArrayGeometry make_geometry(const ScenarioConfig &cfg)
{
    ArrayGeometry g;
    g.num_antennas = cfg.antennas;
    g.spacing_m = cfg.spacing_m();
    g.center_wavelength_m = cfg.wavelength_m();
    return g;
}

std::vector<double> subcarrier_frequencies(double fc_hz, double b_hz, int m_count)
{
    if (m_count < 1)
        throw std::invalid_argument("subcarrier_frequencies: M must be at least 1");
    if (b_hz < 0.0)
        throw std::invalid_argument("subcarrier_frequencies: B must be nonnegative");
    if (fc_hz <= b_hz / 2.0)
        throw std::invalid_argument("subcarrier_frequencies: f_c must exceed B/2");

    std::vector<double> f(m_count);
    for (int m = 1; m <= m_count; ++m)
        f[m - 1] = fc_hz + b_hz * (2.0 * m - 1.0 - m_count) / (2.0 * m_count);
    return f;
}

ElementDistance element_distance(const ArrayGeometry &geom, const PolarPoint &p, int n)
{
    if (n < 1 || n > geom.num_antennas)
        throw std::invalid_argument("element_distance: antenna index out of range");
    if (p.range_m <= 0.0)
        throw std::invalid_argument("element_distance: range must be positive");

    double nd = geom.offset(n) * geom.spacing_m;
    double st = std::sin(p.angle_rad), ct = std::cos(p.angle_rad);

    ElementDistance d;
    // Element n sits at (0, nd); the point at (r cos, r sin).
    d.exact_m = std::hypot(p.range_m * ct, p.range_m * st - nd);
    d.approx_m = p.range_m - nd * st + nd * nd * ct * ct / (2.0 * p.range_m);
    return d;
}

Eigen::VectorXcd near_field_response(const ArrayGeometry &geom, const PolarPoint &p, double f_hz)
{
    if (p.range_m <= 0.0)
        throw std::invalid_argument("near_field_response: range must be positive");

    double wavenum = two_pi * f_hz / c_light;
    double st = std::sin(p.angle_rad), ct = std::cos(p.angle_rad);
    Eigen::VectorXcd a(geom.num_antennas);
    for (int n = 1; n <= geom.num_antennas; ++n)
    {
        double nd = geom.offset(n) * geom.spacing_m;
        double delta = nd * st - nd * nd * ct * ct / (2.0 * p.range_m);
        a(n - 1) = std::polar(1.0, wavenum * delta);
    }
    return a;
}

Eigen::VectorXcd far_field_response(double theta_rad, double f_hz, const ArrayGeometry &geom)
{
    double wavenum = two_pi * f_hz / c_light;
    double st = std::sin(theta_rad);
    Eigen::VectorXcd a(geom.num_antennas);
    for (int n = 1; n <= geom.num_antennas; ++n)
        a(n - 1) = std::polar(1.0, wavenum * geom.offset(n) * geom.spacing_m * st);
    return a;
}

ChannelSet generate_channels(const ArrayGeometry &geom,
                             const std::vector<UserGeometry> &users,
                             const std::vector<double> &freqs_hz,
                             FieldModel field,
                             double nlos_scale)
{
    if (users.empty())
        throw std::invalid_argument("generate_channels: user list is empty");
    if (freqs_hz.empty())
        throw std::invalid_argument("generate_channels: no subcarrier frequencies");

    auto response = [&](const PolarPoint &p, double f) {
        return field == FieldModel::near ? near_field_response(geom, p, f)
                                         : far_field_response(p.angle_rad, f, geom);
    };

    ChannelSet set;
    set.freqs_hz = freqs_hz;
    set.channels.reserve(freqs_hz.size());
    for (double f : freqs_hz)
    {
        Eigen::MatrixXcd Hm(geom.num_antennas, int(users.size()));
        for (std::size_t k = 0; k < users.size(); ++k)
        {
            const UserGeometry &u = users[k];
            double r = u.los.range_m;
            std::complex<double> beta =
                std::polar(c_light / (4.0 * M_PI * f * r), -two_pi * f * r / c_light);
            Eigen::VectorXcd h = beta * response(u.los, f);
            for (const Scatter &s : u.scatters)
            {
                double cascade = s.point.range_m + s.to_user_m;
                std::complex<double> beta_l = std::polar(
                    nlos_scale * c_light / (4.0 * M_PI * f * cascade), -two_pi * f * cascade / c_light);
                h += beta_l * response(s.point, f);
            }
            Hm.col(int(k)) = h;
        }
        set.channels.push_back(std::move(Hm));
    }
    return set;
}

std::vector<UserGeometry> sample_scenario(const ScenarioConfig &cfg, std::uint64_t seed)
{
    if (cfg.r_min_m <= 0.0)
        throw std::invalid_argument("sample_scenario: r_min must be positive");
    if (cfg.r_min_m > cfg.r_max_m)
        throw std::invalid_argument("sample_scenario: r_min must not exceed r_max");

    std::vector<UserGeometry> users(cfg.users);
    for (int k = 0; k < cfg.users; ++k)
    {
        Rng rng(derive_seed(seed, std::uint64_t(k)));
        UserGeometry &u = users[k];
        u.los.range_m = rng.uniform(cfg.r_min_m, cfg.r_max_m);
        u.los.angle_rad = rng.uniform(-cfg.angle_max_rad, cfg.angle_max_rad);
        u.scatters.resize(cfg.paths_per_user);
        for (Scatter &s : u.scatters)
        {
            s.point.range_m = rng.uniform(cfg.r_min_m, cfg.r_max_m);
            s.point.angle_rad = rng.uniform(-cfg.angle_max_rad, cfg.angle_max_rad);
            s.to_user_m = rng.uniform(cfg.r_min_m, cfg.r_max_m);
        }
    }
    return users;
}

} // namespace nfbf
