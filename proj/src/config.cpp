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

#include "nfbf/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nfbf
{

static constexpr double c_light = 299792458.0;

double ScenarioConfig::wavelength_m() const
{
    return c_light / fc_hz;
}

double ScenarioConfig::spacing_m() const
{
    return 0.5 * wavelength_m();
}

double ScenarioConfig::t_max() const
{
    return t_max_s > 0.0 ? t_max_s : antennas / (2.0 * fc_hz);
}

double ScenarioConfig::power_mw() const
{
    return std::pow(10.0, power_dbm / 10.0);
}

double ScenarioConfig::noise_mw() const
{
    double bw = bandwidth_hz / subcarriers;
    return std::pow(10.0, (noise_dbm_hz + 10.0 * std::log10(bw)) / 10.0);
}

double ScenarioConfig::nlos_scale() const
{
    if (nlos_attenuation > 0.0)
        return nlos_attenuation;
    return paths_per_user > 0 ? 1.0 / std::sqrt(double(paths_per_user)) : 1.0;
}

void ScenarioConfig::validate() const
{
    auto fail = [](const std::string &msg) { throw std::invalid_argument("config: " + msg); };

    if (fc_hz <= 0.0)
        fail("fc_hz must be positive");
    if (bandwidth_hz < 0.0)
        fail("bandwidth_hz must be nonnegative");
    if (subcarriers < 1)
        fail("subcarriers must be at least 1");
    if (fc_hz <= bandwidth_hz / 2.0)
        fail("fc_hz must exceed bandwidth_hz/2 (lowest subcarrier would be nonpositive)");
    if (antennas < 1)
        fail("antennas must be at least 1");
    if (rf_chains < 1)
        fail("rf_chains must be at least 1");
    if (ttds_per_chain < 1)
        fail("ttds_per_chain must be at least 1");
    if (users < 1)
        fail("users must be at least 1");
    if (paths_per_user < 0)
        fail("paths_per_user must be nonnegative");
    if (users + 1 > rf_chains)
        fail("users + 1 must not exceed rf_chains");
    if (rf_chains > antennas)
        fail("rf_chains must not exceed antennas");
    if (r_min_m <= 0.0)
        fail("r_min_m must be positive");
    if (r_min_m > r_max_m)
        fail("r_min_m must not exceed r_max_m");
    if (angle_max_rad <= 0.0 || angle_max_rad >= 1.5707963267948966)
        fail("angle_max_rad must lie in (0, pi/2)");
    if (t_max_s < 0.0)
        fail("t_max_s must be nonnegative");
    if (search_grid < 2)
        fail("search_grid must be at least 2");
    if (rho0 <= 0.0 || rho_tilde0 <= 0.0)
        fail("penalty factors must be positive");
    if (alpha <= 0.0 || alpha >= 1.0)
        fail("alpha must lie in (0, 1)");
    for (double tol : {xi1, xi2, xi3, violation_tol, solver_tol, analog_closure})
        if (tol <= 0.0)
            fail("tolerances must be positive");
    if (xi4 < 0.0 || xi_sub < 0.0)
        fail("xi4 and xi_sub must be nonnegative (0 selects the default)");
    if (mm_max_iters < 1 || analog_inner_max < 1 || analog_outer_max < 1 || bcd_inner_max < 1 ||
        outer_max < 1)
        fail("iteration caps must be at least 1");
    if (realizations < 1)
        fail("realizations must be at least 1");
}

ScenarioConfig paper_profile()
{
    return ScenarioConfig{};
}

ScenarioConfig desk_profile()
{
    ScenarioConfig cfg;
    cfg.antennas = 64;
    cfg.users = 3;
    cfg.subcarriers = 5;
    cfg.rf_chains = 8;
    cfg.ttds_per_chain = 8;
    cfg.realizations = 20;
    return cfg;
}

namespace
{

// One setter per recognized key; keeps parse_config and apply_config_value
// in lock-step.
using Setter = std::function<void(ScenarioConfig &, const std::string &)>;

double parse_double(const std::string &v)
{
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    while (pos < v.size() && std::isspace((unsigned char)v[pos]))
        ++pos;
    if (pos != v.size())
        throw std::invalid_argument("trailing characters after number");
    return x;
}

int parse_int(const std::string &v)
{
    double x = parse_double(v);
    int i = int(std::llround(x));
    if (double(i) != x)
        throw std::invalid_argument("expected an integer");
    return i;
}

std::uint64_t parse_u64(const std::string &v)
{
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos, 10);
    while (pos < v.size() && std::isspace((unsigned char)v[pos]))
        ++pos;
    if (pos != v.size())
        throw std::invalid_argument("trailing characters after number");
    return x;
}

const std::map<std::string, Setter> &key_table()
{
    static const std::map<std::string, Setter> table = {
        {"fc_hz", [](ScenarioConfig &c, const std::string &v) { c.fc_hz = parse_double(v); }},
        {"bandwidth_hz", [](ScenarioConfig &c, const std::string &v) { c.bandwidth_hz = parse_double(v); }},
        {"subcarriers", [](ScenarioConfig &c, const std::string &v) { c.subcarriers = parse_int(v); }},
        {"antennas", [](ScenarioConfig &c, const std::string &v) { c.antennas = parse_int(v); }},
        {"rf_chains", [](ScenarioConfig &c, const std::string &v) { c.rf_chains = parse_int(v); }},
        {"ttds_per_chain", [](ScenarioConfig &c, const std::string &v) { c.ttds_per_chain = parse_int(v); }},
        {"users", [](ScenarioConfig &c, const std::string &v) { c.users = parse_int(v); }},
        {"paths_per_user", [](ScenarioConfig &c, const std::string &v) { c.paths_per_user = parse_int(v); }},
        {"power_dbm", [](ScenarioConfig &c, const std::string &v) { c.power_dbm = parse_double(v); }},
        {"noise_dbm_hz", [](ScenarioConfig &c, const std::string &v) { c.noise_dbm_hz = parse_double(v); }},
        {"t_max_s", [](ScenarioConfig &c, const std::string &v) { c.t_max_s = parse_double(v); }},
        {"r_min_m", [](ScenarioConfig &c, const std::string &v) { c.r_min_m = parse_double(v); }},
        {"r_max_m", [](ScenarioConfig &c, const std::string &v) { c.r_max_m = parse_double(v); }},
        {"angle_max_rad", [](ScenarioConfig &c, const std::string &v) { c.angle_max_rad = parse_double(v); }},
        {"nlos_attenuation", [](ScenarioConfig &c, const std::string &v) { c.nlos_attenuation = parse_double(v); }},
        {"search_grid", [](ScenarioConfig &c, const std::string &v) { c.search_grid = parse_int(v); }},
        {"rho0", [](ScenarioConfig &c, const std::string &v) { c.rho0 = parse_double(v); }},
        {"rho_tilde0", [](ScenarioConfig &c, const std::string &v) { c.rho_tilde0 = parse_double(v); }},
        {"alpha", [](ScenarioConfig &c, const std::string &v) { c.alpha = parse_double(v); }},
        {"xi1", [](ScenarioConfig &c, const std::string &v) { c.xi1 = parse_double(v); }},
        {"xi2", [](ScenarioConfig &c, const std::string &v) { c.xi2 = parse_double(v); }},
        {"xi3", [](ScenarioConfig &c, const std::string &v) { c.xi3 = parse_double(v); }},
        {"xi4", [](ScenarioConfig &c, const std::string &v) { c.xi4 = parse_double(v); }},
        {"xi_sub", [](ScenarioConfig &c, const std::string &v) { c.xi_sub = parse_double(v); }},
        {"violation_tol", [](ScenarioConfig &c, const std::string &v) { c.violation_tol = parse_double(v); }},
        {"solver_tol", [](ScenarioConfig &c, const std::string &v) { c.solver_tol = parse_double(v); }},
        {"analog_closure", [](ScenarioConfig &c, const std::string &v) { c.analog_closure = parse_double(v); }},
        {"mm_max_iters", [](ScenarioConfig &c, const std::string &v) { c.mm_max_iters = parse_int(v); }},
        {"analog_inner_max", [](ScenarioConfig &c, const std::string &v) { c.analog_inner_max = parse_int(v); }},
        {"analog_outer_max", [](ScenarioConfig &c, const std::string &v) { c.analog_outer_max = parse_int(v); }},
        {"bcd_inner_max", [](ScenarioConfig &c, const std::string &v) { c.bcd_inner_max = parse_int(v); }},
        {"outer_max", [](ScenarioConfig &c, const std::string &v) { c.outer_max = parse_int(v); }},
        {"realizations", [](ScenarioConfig &c, const std::string &v) { c.realizations = parse_int(v); }},
        {"seed", [](ScenarioConfig &c, const std::string &v) { c.seed = parse_u64(v); }},
    };
    return table;
}

std::string trim(const std::string &s)
{
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

void apply_config_value(ScenarioConfig &cfg, const std::string &key, const std::string &value)
{
    auto it = key_table().find(key);
    if (it == key_table().end())
        throw std::invalid_argument("unknown key '" + key + "'");
    try
    {
        it->second(cfg, value);
    }
    catch (const std::out_of_range &)
    {
        throw std::invalid_argument("value '" + value + "' for key '" + key + "' is out of range");
    }
    catch (const std::invalid_argument &e)
    {
        // std::stod and friends throw with unhelpful one-word messages.
        std::string what = e.what();
        if (what.size() < 6)
            what = "not a number";
        throw std::invalid_argument("bad value '" + value + "' for key '" + key + "': " + what);
    }
}

ScenarioConfig parse_config(const std::string &path, const ScenarioConfig &base)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path + "'");

    ScenarioConfig cfg = base;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::string s = line;
        std::size_t hash = s.find('#');
        if (hash != std::string::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;

        std::size_t eq = s.find('=');
        auto fail = [&](const std::string &msg) {
            throw std::invalid_argument("config: " + path + ":" + std::to_string(lineno) + ": " + msg);
        };
        if (eq == std::string::npos)
            fail("expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            fail("empty key");
        if (value.empty())
            fail("empty value for key '" + key + "'");
        if (!seen.insert(key).second)
            fail("duplicate key '" + key + "'");
        try
        {
            apply_config_value(cfg, key, value);
        }
        catch (const std::exception &e)
        {
            fail(std::string(e.what()));
        }
    }
    cfg.validate();
    return cfg;
}

} // namespace nfbf
