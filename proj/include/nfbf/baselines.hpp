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

#ifndef NFBF_BASELINES_HPP
#define NFBF_BASELINES_HPP

#include <cstdint>
#include <string>

#include "nfbf/channel.hpp"
#include "nfbf/config.hpp"
#include "nfbf/driver.hpp"

namespace nfbf
{

enum class SchemeArch
{
    fdb, // unconstrained fully digital precoders (upper bound)
    fhb, // fully connected TTD hybrid
    shb, // sub-connected TTD hybrid
    ps   // fully connected, delays pinned to zero (phase shifters only)
};

enum class Access
{
    rsma,
    sdma // common stream disabled: p_0 = 0 and C = 0
};

struct SchemeSpec
{
    SchemeArch arch = SchemeArch::fhb;
    Access access = Access::rsma;
    FieldModel field = FieldModel::near;

    // When optimizing under the planar-wavefront model, score the result on
    // the planar channels too instead of the spherical truth.
    bool score_on_far = false;
};

const char *to_string(SchemeArch a);
const char *to_string(Access a);
const char *to_string(FieldModel f);

// Fully digital upper bound: penalty-free surrogate ascent over the
// unstructured precoders, followed by power projection and true-rate
// evaluation.
SolveResult solve_fdb(const ChannelSet &H, const ScenarioConfig &cfg, bool include_common,
                      std::uint64_t init_seed);

// Phase-shifter-only scheme: the hybrid driver with every delay pinned to 0.
SolveResult solve_ps_only(const ChannelSet &H, const ScenarioConfig &cfg,
                          std::uint64_t init_seed);

// Private-streams-only scheme on the fully connected hybrid.
SolveResult solve_sdma(const ChannelSet &H, const ScenarioConfig &cfg, SchemeArch arch,
                       std::uint64_t init_seed);

// Optimizes against the planar-wavefront channels, then re-evaluates the
// resulting beamformer on the spherical-truth channels (or on the planar
// ones when score_on_far is set).
SolveResult solve_far(const ChannelSet &H_far, const ChannelSet &H_near,
                      const ScenarioConfig &cfg, SchemeArch arch, bool score_on_far,
                      std::uint64_t init_seed);

// Dispatches one realization: samples geometry from the seed, generates the
// channel sets the scheme needs, runs it, and returns the result scored on
// the spherical truth unless score_on_far is set.
SolveResult solve_scheme(const ScenarioConfig &cfg, const SchemeSpec &spec,
                         std::uint64_t realization_seed);

} // namespace nfbf

#endif
