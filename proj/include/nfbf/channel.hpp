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

#ifndef NFBF_CHANNEL_HPP
#define NFBF_CHANNEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nfbf/config.hpp"

namespace nfbf
{

enum class FieldModel
{
    near, // spherical-wavefront response, range and angle dependent
    far   // planar-wavefront response, angle dependent only
};

// Uniform linear array centered at the origin along the y-axis.
struct ArrayGeometry
{
    int num_antennas = 0;            // N
    double spacing_m = 0.0;          // d
    double center_wavelength_m = 0.0;

    // Symmetric element offset (2n - N - 1)/2 for 1-based index n; offsets
    // sum to zero by construction.
    double offset(int n) const
    {
        return 0.5 * (2.0 * n - num_antennas - 1.0);
    }

    double aperture_m() const
    {
        return (num_antennas - 1) * spacing_m;
    }
};

ArrayGeometry make_geometry(const ScenarioConfig &cfg);

struct PolarPoint
{
    double range_m = 0.0;
    double angle_rad = 0.0;
};

struct Scatter
{
    PolarPoint point;        // scatter location seen from the array
    double to_user_m = 0.0;  // scatter-to-user distance
};

struct UserGeometry
{
    PolarPoint los;
    std::vector<Scatter> scatters;
};

// Per-subcarrier channel matrices; column k of channels[m] is user k's
// channel at subcarrier m.
struct ChannelSet
{
    std::vector<Eigen::MatrixXcd> channels;
    std::vector<double> freqs_hz;

    int subcarriers() const { return int(channels.size()); }
    int antennas() const { return channels.empty() ? 0 : int(channels[0].rows()); }
    int users() const { return channels.empty() ? 0 : int(channels[0].cols()); }
};

// Subcarrier grid f_m = f_c + B (2m - 1 - M) / (2M), m = 1..M. Strictly
// increasing and symmetric about f_c; throws on M < 1 or f_c <= B/2.
std::vector<double> subcarrier_frequencies(double fc_hz, double b_hz, int m_count);

struct ElementDistance
{
    double approx_m = 0.0; // second-order Taylor expansion in 1/r
    double exact_m = 0.0;  // Euclidean distance
};

// Distance between antenna n (1-based) and a polar point: the exact norm and
// the expansion r - nd*sin(th) + (nd)^2 cos^2(th)/(2r) used by the channel
// model. Requires r > 0 and n in 1..N.
ElementDistance element_distance(const ArrayGeometry &geom, const PolarPoint &p, int n);

// Spherical-wavefront response: entry n is exp(j 2 pi f/c * delta_n) with
// delta_n = nd*sin(th) - (nd)^2 cos^2(th)/(2r). All entries unit modulus.
Eigen::VectorXcd near_field_response(const ArrayGeometry &geom, const PolarPoint &p, double f_hz);

// Planar-wavefront response: entry n is exp(j 2 pi f/c * nd*sin(th)).
Eigen::VectorXcd far_field_response(double theta_rad, double f_hz, const ArrayGeometry &geom);

// Builds h_{k,m} as the line-of-sight term plus one term per scatter. The
// LoS gain is (c / (4 pi f r)) exp(-j 2 pi f r / c); scatter path gains use
// the cascaded distance r + r_tilde with the extra amplitude factor
// nlos_scale. Far mode swaps in the planar response, keeping the same gains.
ChannelSet generate_channels(const ArrayGeometry &geom,
                             const std::vector<UserGeometry> &users,
                             const std::vector<double> &freqs_hz,
                             FieldModel field,
                             double nlos_scale);

// Draws user and scatter geometry: ranges uniform in [r_min, r_max], angles
// uniform in [-angle_max, angle_max], scatter-to-user distances uniform in
// the same range interval. Each user consumes an independent sub-stream of
// the seed, so the first k users of a (K+1)-user scenario coincide with the
// K-user scenario generated from the same seed.
std::vector<UserGeometry> sample_scenario(const ScenarioConfig &cfg, std::uint64_t seed);

} // namespace nfbf

#endif
