#include "chemostat/rng.hpp"

#include <cmath>

namespace chemostat::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    return static_cast<std::uint32_t>(p >> 32);
}

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t path,
                                          std::uint64_t step, std::uint32_t channel) noexcept {
    const std::array<std::uint32_t, 2> key{
        static_cast<std::uint32_t>(seed) ^ static_cast<std::uint32_t>(path >> 32),
        static_cast<std::uint32_t>(seed >> 32),
    };
    const std::array<std::uint32_t, 4> counter{
        static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>(step >> 32),
        static_cast<std::uint32_t>(path),
        channel,
    };
    return philox4x32(counter, key);
}

inline double to_unit_interval(std::uint64_t bits) noexcept {
    // (bits + 1) * 2^-64 lies in (0, 1]; never returns 0, so log() is safe
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, lo1;
        const std::uint32_t hi0 = mulhi(kPhiloxM0, ctr[0], lo0);
        const std::uint32_t hi1 = mulhi(kPhiloxM1, ctr[2], lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint32_t channel) noexcept {
    const auto r = block(seed, path, step, channel);
    const std::uint64_t u_bits = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t v_bits = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u = to_unit_interval(u_bits);
    const double v = to_unit_interval(v_bits);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
}

double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                 std::uint32_t channel) noexcept {
    const auto r = block(seed, path, step, channel);
    return to_unit_interval((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
}

} // namespace chemostat::rng
