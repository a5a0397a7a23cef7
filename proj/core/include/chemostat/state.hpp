#ifndef CHEMOSTAT_STATE_HPP
#define CHEMOSTAT_STATE_HPP

#include <cmath>

namespace chemostat {

/// Dimensionless system state: populations x, y and substrate z.
struct State {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool finite() const noexcept {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline State operator+(State a, const State& b) noexcept {
    a.x += b.x; a.y += b.y; a.z += b.z;
    return a;
}

inline State operator-(State a, const State& b) noexcept {
    a.x -= b.x; a.y -= b.y; a.z -= b.z;
    return a;
}

inline State operator*(double s, State a) noexcept {
    a.x *= s; a.y *= s; a.z *= s;
    return a;
}

} // namespace chemostat

#endif
