#ifndef CHEMOSTAT_DETAIL_RUNGE_KUTTA_HPP
#define CHEMOSTAT_DETAIL_RUNGE_KUTTA_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "chemostat/errors.hpp"

namespace chemostat::detail {

/**
 * Dormand-Prince 5(4) embedded pair on std::array<double, N> states.
 *
 * The controller is a plain step-doubling PI-free accept/reject loop with
 * the usual 0.9 safety factor. Callers can veto a proposed state through
 * `reject_state` (used to bounce steps that drive populations negative)
 * and post-process accepted states through `clamp_state`.
 */
template <std::size_t N>
struct Rk45Options {
    double rel_tol = 1e-9;
    std::array<double, N> abs_tol{};         // per-component absolute tolerance
    double initial_dt = 1e-6;
    double max_dt = 1e300;
    std::size_t max_steps = 200'000'000;
    double min_dt_factor = 1e-14;            // underflow when dt < min_dt_factor * t_span
};

/// Returns the final accepted state; `dt_hint` is updated so a following
/// segment can resume without re-ramping the step size.
template <std::size_t N, typename Rhs, typename Observer, typename RejectState, typename ClampState>
std::array<double, N> rk45_integrate(Rhs&& rhs, std::array<double, N> state, double t0, double t1,
                                     const Rk45Options<N>& opt, Observer&& observe,
                                     RejectState&& reject_state, ClampState&& clamp_state,
                                     double* dt_hint = nullptr) {
    using Vec = std::array<double, N>;

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // difference between 5th and embedded 4th order weights
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto axpy = [](Vec& out, const Vec& base, double h,
                   std::initializer_list<std::pair<double, const Vec*>> terms) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (const auto& [w, k] : terms) acc += w * (*k)[i];
            out[i] = base[i] + h * acc;
        }
    };

    double t = t0;
    double dt = (dt_hint != nullptr && *dt_hint > 0.0) ? *dt_hint : opt.initial_dt;
    dt = std::min(dt, t1 - t0);
    const double span = t1 - t0;
    Vec k1 = rhs(t, state);

    observe(t, state);

    for (std::size_t step = 0; step < opt.max_steps && t < t1; ++step) {
        if (dt_hint != nullptr) *dt_hint = std::min(dt, opt.max_dt);
        const double remaining = t1 - t;
        if (remaining <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t1), 1.0)) {
            t = t1; // within rounding of the endpoint
            break;
        }
        dt = std::min({dt, opt.max_dt, remaining});
        const bool final_step = dt >= remaining;
        if (dt < opt.min_dt_factor * span) {
            throw NumericalFailure("rk45: step size underflow", t);
        }

        Vec k2, k3, k4, k5, k6, k7, y2, y5;
        axpy(y2, state, dt, {{a21, &k1}});
        k2 = rhs(t + c2 * dt, y2);
        axpy(y2, state, dt, {{a31, &k1}, {a32, &k2}});
        k3 = rhs(t + c3 * dt, y2);
        axpy(y2, state, dt, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        k4 = rhs(t + c4 * dt, y2);
        axpy(y2, state, dt, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        k5 = rhs(t + c5 * dt, y2);
        axpy(y2, state, dt, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        k6 = rhs(t + dt, y2);
        axpy(y5, state, dt, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        k7 = rhs(t + dt, y5);

        double err_norm = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double err = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                     e6 * k6[i] + e7 * k7[i]);
            const double tol = opt.abs_tol[i] +
                               opt.rel_tol * std::max(std::abs(state[i]), std::abs(y5[i]));
            if (!std::isfinite(y5[i])) finite = false;
            err_norm = std::max(err_norm, std::abs(err) / tol);
        }

        if (finite && err_norm <= 1.0 && !reject_state(y5)) {
            t = final_step ? t1 : t + dt;
            clamp_state(y5);
            state = y5;
            k1 = k7; // FSAL
            observe(t, state);
            const double grow = 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2);
            dt *= std::min(5.0, grow);
        } else {
            // a state-vetoed step may carry a small error estimate; still shrink
            const double shrink =
                finite ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.5) : 0.1;
            dt *= shrink;
        }
    }

    if (t < t1) throw NumericalFailure("rk45: max step count exceeded", t);
    return state;
}

} // namespace chemostat::detail

#endif
