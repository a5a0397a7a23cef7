#include "chemostat/ode.hpp"

#include <array>
#include <cmath>

#include "chemostat/detail/runge_kutta.hpp"
#include "chemostat/errors.hpp"

namespace chemostat {

State rhs(const ChemostatParams& params, const State& s) {
    const double f = params.curve_x.rate(s.z);
    const double g = params.curve_y.rate(s.z);
    return State{
        s.x * (f - params.theta),
        s.y * (g - params.theta),
        params.theta * (params.z_f - s.z) - s.x * f - s.y * g,
    };
}

OdeTrajectory integrate_ode(const ChemostatParams& params, const State& s0, double t_end,
                            const OdeControls& controls) {
    validate_params(params);
    if (!(t_end > 0.0)) throw InvalidArgument("integrate_ode: t_end must be > 0");
    if (!s0.finite() || s0.x < 0.0 || s0.y < 0.0 || s0.z < 0.0) {
        throw InvalidArgument("integrate_ode: initial state must be finite and non-negative");
    }

    const double abs_tol = controls.abs_tol_scale * params.z_f;

    detail::Rk45Options<3> opt;
    opt.rel_tol = controls.rel_tol;
    opt.abs_tol = {abs_tol, abs_tol, abs_tol};
    opt.initial_dt = std::min(1e-6, t_end);
    opt.max_steps = controls.max_steps;

    auto deriv = [&](double, const std::array<double, 3>& v) {
        const State d = rhs(params, State{v[0], v[1], v[2]});
        return std::array<double, 3>{d.x, d.y, d.z};
    };
    auto reject = [&](const std::array<double, 3>& v) {
        return v[0] < -abs_tol || v[1] < -abs_tol || v[2] < -abs_tol;
    };
    auto clamp = [](std::array<double, 3>& v) {
        for (double& c : v) {
            if (c < 0.0) c = 0.0;
        }
    };
    auto no_observe = [](double, const std::array<double, 3>&) {};

    OdeTrajectory traj;
    std::array<double, 3> v{s0.x, s0.y, s0.z};
    traj.times.push_back(0.0);
    traj.states.push_back(s0);

    // integrate segment-by-segment so samples land exactly on the output grid
    double dt_hint = 0.0;
    double t = 0.0;
    while (t < t_end) {
        const double t_next =
            controls.output_dt > 0.0 ? std::min(t + controls.output_dt, t_end) : t_end;
        v = detail::rk45_integrate<3>(deriv, v, t, t_next, opt, no_observe, reject, clamp,
                                      &dt_hint);
        t = t_next;
        traj.times.push_back(t);
        traj.states.push_back(State{v[0], v[1], v[2]});
    }
    return traj;
}

double coexistence_line(const ChemostatParams& params, double x) {
    if (!(x >= 0.0) || !(x <= params.z_f - 1.0)) {
        throw InvalidArgument("coexistence_line: x must lie in [0, z_f - 1]");
    }
    return params.z_f - x - 1.0;
}

} // namespace chemostat
