#ifndef CHEMOSTAT_RNG_HPP
#define CHEMOSTAT_RNG_HPP

#include <array>
#include <cstdint>

namespace chemostat {

/**
 * Philox4x32-10 counter-based generator.
 *
 * Every random draw is addressed by (seed, path, step, channel), so ensemble
 * members, refinement ladders and replays are reproducible independently of
 * evaluation order, and no generator state is carried between steps. One
 * Philox block yields 128 bits; a draw maps them to a double via Box-Muller
 * (normals) or a 64-bit mantissa (uniforms).
 */
namespace rng {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Standard normal draw addressed by (seed, path, step, channel).
double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint32_t channel) noexcept;

/// Uniform draw in (0, 1], same addressing scheme.
double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                 std::uint32_t channel) noexcept;

} // namespace rng

} // namespace chemostat

#endif
