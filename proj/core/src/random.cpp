// SPDX-License-Identifier: Apache-2.0
#include "dmce/common.hpp"

namespace dmce {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t index)
{
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

Vec standard_normal(Index n, Rng& rng)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = dist(rng);
    }
    return v;
}

} // namespace dmce
