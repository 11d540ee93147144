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

#ifndef NFBF_CONFIG_HPP
#define NFBF_CONFIG_HPP

#include <cstdint>
#include <string>

namespace nfbf
{

// All physical and algorithmic parameters of one scenario. Defaults follow
// the 30 GHz / 10 GHz wideband downlink setup: 128-element half-wavelength
// ULA, 8 RF chains with 16 TTDs each, 4 users with 2 scatter paths, 20 dBm
// budget, -174 dBm/Hz noise density.
struct ScenarioConfig
{
    double fc_hz = 30e9;           // carrier frequency
    double bandwidth_hz = 10e9;    // total bandwidth B
    int subcarriers = 10;          // M
    int antennas = 128;            // N
    int rf_chains = 8;             // A
    int ttds_per_chain = 16;       // Q
    int users = 4;                 // K
    int paths_per_user = 2;        // scatter paths per user (NLoS)
    double power_dbm = 20.0;       // transmit budget P_th
    double noise_dbm_hz = -174.0;  // noise density
    double t_max_s = 0.0;          // max TTD delay; 0 selects N/(2 fc)
    double r_min_m = 10.0;         // user/scatter range interval
    double r_max_m = 20.0;
    double angle_max_rad = 1.0471975511965976; // pi/3, angles in [-max, max]
    double nlos_attenuation = 0.0; // per-path amplitude scale; 0 selects 1/sqrt(L)
    int search_grid = 1000;        // delay search grid points S (both endpoints)

    double rho0 = 100.0;           // initial penalty factor, digital block
    double rho_tilde0 = 100.0;     // initial penalty factor, analog block
    double alpha = 0.5;            // penalty reduction factor
    double xi1 = 1e-4;             // digital-block loop threshold (bits/s/Hz)
    double xi2 = 1e-5;             // analog-block loop threshold (relative)
    double xi3 = 1e-3;             // driver inner-loop threshold (bits/s/Hz)
    double xi4 = 0.0;              // sub-connected driver threshold; 0 selects xi3
    double xi_sub = 0.0;           // sub-connected phase/delay loop; 0 selects xi2
    double violation_tol = 1e-4;   // relative coupling-violation target
    double solver_tol = 1e-7;      // interior-point certificate tolerance
    double analog_closure = 1e-6;  // relative auxiliary-closure target

    int mm_max_iters = 50;         // digital-block iteration cap
    int analog_inner_max = 100;    // analog alternation cap per penalty level
    int analog_outer_max = 30;     // analog penalty-level cap
    int bcd_inner_max = 20;        // driver block-cycle cap per penalty level
    int outer_max = 30;            // driver penalty-level cap

    int realizations = 100;
    std::uint64_t seed = 1;

    double wavelength_m() const;
    double spacing_m() const;      // half-wavelength ULA
    double t_max() const;          // resolved maximum delay
    double power_mw() const;
    double noise_mw() const;       // per-subcarrier noise power, density x B/M
    double nlos_scale() const;     // resolved per-path amplitude factor

    // Throws std::invalid_argument with a descriptive message on the first
    // violated architecture or parameter constraint.
    void validate() const;
};

// Returns the default (full-scale) configuration.
ScenarioConfig paper_profile();

// Reduced configuration for fast runs: N=64, K=3, M=5, A=8, Q=8, 20
// realizations. Eight RF chains keep every divisibility requirement of the
// sub-connected architecture intact (A | N and Q | N/A).
ScenarioConfig desk_profile();

// Parses a flat `key = value` file on top of the given base configuration.
// Grammar: one pair per line, `#` starts a comment, blank lines ignored.
// Unknown keys, duplicate keys, and ill-typed values raise
// std::invalid_argument carrying the offending line number.
ScenarioConfig parse_config(const std::string &path, const ScenarioConfig &base);

// Applies one `key = value` override (same key set as parse_config).
void apply_config_value(ScenarioConfig &cfg, const std::string &key, const std::string &value);

} // namespace nfbf

#endif
