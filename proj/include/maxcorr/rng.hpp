#pragma once

#include <cstdint>
#include <random>

namespace maxcorr {

using Rng = std::mt19937_64;

/// Independent generator for (master seed, stream tag, index). Trials, segments
/// and batches each get their own index so results do not depend on scheduling.
inline Rng substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    const auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x); };
    const auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(tag), hi(tag), lo(index), hi(index), 0x6d617863u};
    return Rng(seq);
}

/// Uniform draw on the open interval (0, 1), never returning either endpoint.
template <typename URBG>
double uniform_open(URBG& rng) {
    static_assert(URBG::max() - URBG::min() >= 0xffffffffffffffffull, "need a 64-bit generator");
    const std::uint64_t bits = static_cast<std::uint64_t>(rng() - URBG::min()) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace maxcorr
