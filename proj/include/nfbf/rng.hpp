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

#ifndef NFBF_RNG_HPP
#define NFBF_RNG_HPP

#include <cstdint>
#include <random>

namespace nfbf
{

// Derives a child seed from a base seed and a salt through one splitmix64
// round. Used everywhere a reproducible sub-stream is needed (per-user
// geometry, per-realization runs, per-scheme initializations), so that
// derived streams are stable no matter in which order they are consumed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic uniform generator. std::mt19937_64 has a fully specified
// output sequence; the [0,1) mapping below uses the top 53 bits directly
// instead of std::uniform_real_distribution, whose output is
// implementation-defined and would break cross-platform reproducibility.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    // Uniform in [0, 1)
    double uniform()
    {
        return double(eng() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi)
    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * uniform();
    }

    std::uint64_t next_u64()
    {
        return eng();
    }

  private:
    std::mt19937_64 eng;
};

} // namespace nfbf

#endif
