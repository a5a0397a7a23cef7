#include "chemostat/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "chemostat/detail/runge_kutta.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

namespace {

/// Safeguarded secant/bisection root finder on a bracket with a sign change.
template <typename F>
double solve_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi,
                       double tol = 1e-14, int max_iter = 200) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    double x = lo;
    for (int i = 0; i < max_iter && hi - lo > tol * std::max(1.0, std::abs(lo)); ++i) {
        const double secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        x = (secant > lo + 0.01 * (hi - lo) && secant < hi - 0.01 * (hi - lo))
                ? secant
                : 0.5 * (lo + hi);
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (f_lo < 0.0)) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    return 0.5 * (lo + hi);
}

double effective_a1(const ChemostatParams& p) { return p.curve_x.a - p.curve_x.gamma; }
double effective_a2(const ChemostatParams& p) { return p.curve_y.a - p.curve_y.gamma; }

void require_growth_regime(const ChemostatParams& p, const char* where) {
    if (!(effective_a1(p) > p.theta) || !(effective_a2(p) > p.theta)) {
        throw InvalidArgument(std::string(where) +
                              ": stage structure requires a_i - gamma_i > theta");
    }
}

} // namespace

MatchingConstants matching_constants(const ChemostatParams& params, double M1, double M2) {
    require_growth_regime(params, "matching_constants");
    if (!(M1 > 0.0) || !(M2 > 0.0)) {
        throw InvalidArgument("matching_constants: M1, M2 must be > 0");
    }
    if (!(params.z_f > std::max(M1, M2))) {
        throw InvalidArgument("matching_constants: z_f must exceed the initial populations");
    }
    const double l1 = effective_a1(params) - params.theta;
    const double l2 = effective_a2(params) - params.theta;

    MatchingConstants mc;
    mc.L = std::log(params.z_f / M1) / l1;
    mc.mu1 = M1 * std::exp(l1 * mc.L) / params.z_f;
    mc.mu2 = M2 * std::exp(l2 * mc.L) / params.z_f;
    mc.residual = mc.L - std::log(params.z_f / M2) / l2;
    return mc;
}

State stage2_solution(const ChemostatParams& params, double M1, double M2, double z0, double t) {
    require_growth_regime(params, "stage2_solution");
    if (!(t >= 0.0)) throw InvalidArgument("stage2_solution: t must be >= 0");
    const double c0 = 1.0 - z0 / params.z_f;
    return State{
        M1 * std::exp((effective_a1(params) - params.theta) * t),
        M2 * std::exp((effective_a2(params) - params.theta) * t),
        params.z_f * (1.0 - c0 * std::exp(-params.theta * t)),
    };
}

Stage3Point stage3_solution(const ChemostatParams& params, double mu1, double mu2,
                            double t_prime) {
    require_growth_regime(params, "stage3_solution");
    const double x = mu1 * std::exp((effective_a1(params) - params.theta) * t_prime);
    const double y = mu2 * std::exp((effective_a2(params) - params.theta) * t_prime);
    return Stage3Point{x, y, 1.0 - x - y};
}

Stage3Terminal find_t0_prime(const ChemostatParams& params, double mu1, double mu2) {
    require_growth_regime(params, "find_t0_prime");
    if (!(mu1 > 0.0) || !(mu2 > 0.0)) {
        throw InvalidArgument("find_t0_prime: mu1, mu2 must be > 0");
    }
    const double l1 = effective_a1(params) - params.theta;
    const double l2 = effective_a2(params) - params.theta;
    auto deficit = [&](double t) {
        return mu1 * std::exp(l1 * t) + mu2 * std::exp(l2 * t) - 1.0;
    };

    // the deficit is strictly increasing; expand a bracket around t = 0
    double lo = 0.0, hi = 0.0;
    double f0 = deficit(0.0);
    constexpr double horizon = 1000.0;
    if (f0 > 0.0) {
        hi = 0.0;
        double span = 1.0;
        lo = -span;
        while (deficit(lo) > 0.0) {
            span *= 2.0;
            lo = -span;
            if (span > horizon) {
                throw NumericalFailure("find_t0_prime: no sign change within scanned horizon");
            }
        }
    } else {
        lo = 0.0;
        double span = 1.0;
        hi = span;
        while (deficit(hi) < 0.0) {
            span *= 2.0;
            hi = span;
            if (span > horizon) {
                throw NumericalFailure("find_t0_prime: no sign change within scanned horizon");
            }
        }
    }

    Stage3Terminal out;
    out.t0_prime = solve_bracketed(deficit, lo, hi, deficit(lo), deficit(hi));
    out.x0_prime = mu1 * std::exp(l1 * out.t0_prime);
    out.y0_prime = mu2 * std::exp(l2 * out.t0_prime);
    return out;
}

namespace {

/// Bracketed root of x0' f(Z) + y0' g(Z) = theta; the left side is strictly
/// increasing in Z, so the root is unique whenever the z -> inf limit
/// exceeds theta. The design bracket max(10, 10 b1, 10 b2) is doubled as
/// needed for states close to the singularity line.
double consumed_rate_root(const ChemostatParams& p, double x0, double y0) {
    const double limit = x0 * effective_a1(p) + y0 * effective_a2(p);
    if (!(limit > p.theta)) {
        throw NumericalFailure("substrate constraint has no positive root: "
                               "x a1 + y a2 <= theta");
    }
    auto h = [&](double z) {
        return x0 * p.curve_x.rate(z) + y0 * p.curve_y.rate(z) - p.theta;
    };
    double hi = std::max({10.0, 10.0 * p.curve_x.b, 10.0 * p.curve_y.b});
    double f_hi = h(hi);
    int doublings = 0;
    while (f_hi < 0.0) {
        hi *= 2.0;
        f_hi = h(hi);
        if (++doublings > 120) {
            throw NumericalFailure("substrate constraint root escapes every bracket");
        }
    }
    const double f_lo = h(0.0);
    if (f_lo >= 0.0) {
        throw NumericalFailure("substrate constraint root bracket degenerate at z = 0");
    }
    return solve_bracketed(h, 0.0, hi, f_lo, f_hi);
}

} // namespace

Stage4Result stage4_evolve(const ChemostatParams& params, double x0_prime, double y0_prime,
                           double t_span, double z_start, double output_dt) {
    if (!(x0_prime >= 0.0) || !(y0_prime >= 0.0) || x0_prime + y0_prime == 0.0) {
        throw InvalidArgument("stage4_evolve: populations must be non-negative, not both zero");
    }
    const double crash = params.theta - x0_prime * effective_a1(params) -
                         y0_prime * effective_a2(params);
    if (!(crash < 0.0)) {
        throw InvalidArgument("stage4_evolve: crash condition theta - x0' a1 - y0' a2 < 0 fails");
    }
    if (!(t_span > 0.0) || !(z_start > 0.0)) {
        throw InvalidArgument("stage4_evolve: t_span and z_start must be > 0");
    }

    Stage4Result result;
    result.z_infinity_root = consumed_rate_root(params, x0_prime, y0_prime);

    detail::Rk45Options<1> opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = {1e-12};
    opt.initial_dt = 1e-6;

    auto deriv = [&](double, const std::array<double, 1>& v) {
        return std::array<double, 1>{params.theta - x0_prime * params.curve_x.rate(v[0]) -
                                     y0_prime * params.curve_y.rate(v[0])};
    };
    auto no_reject = [](const std::array<double, 1>&) { return false; };
    auto no_clamp = [](std::array<double, 1>&) {};
    auto no_observe = [](double, const std::array<double, 1>&) {};

    std::array<double, 1> v{z_start};
    double t = 0.0;
    double dt_hint = 0.0;
    result.times.push_back(0.0);
    result.z_path.push_back(z_start);
    while (t < t_span) {
        const double t_next = output_dt > 0.0 ? std::min(t + output_dt, t_span) : t_span;
        v = detail::rk45_integrate<1>(deriv, v, t, t_next, opt, no_observe, no_reject, no_clamp,
                                      &dt_hint);
        t = t_next;
        result.times.push_back(t);
        result.z_path.push_back(v[0]);
    }
    result.z_infinity_ode = v[0];
    return result;
}

namespace {

bool no_death(const ChemostatParams& p) {
    return p.curve_x.gamma == 0.0 && p.curve_y.gamma == 0.0;
}

void require_above_singularity(const ChemostatParams& p, double x_bar, double y_bar,
                               const char* where) {
    const double lead = p.theta - x_bar * effective_a1(p) - y_bar * effective_a2(p);
    if (!(lead < 0.0)) {
        std::ostringstream os;
        os << where << ": state (" << x_bar << ", " << y_bar
           << ") lies at or below the singularity line";
        throw NumericalFailure(os.str());
    }
}

} // namespace

std::pair<double, double> stage5_zbar_roots(const ChemostatParams& params, double x_bar,
                                            double y_bar) {
    if (!no_death(params)) {
        throw InvalidArgument("stage5_zbar_roots: quadratic form applies to gamma = 0 only");
    }
    if (!(x_bar >= 0.0) || !(y_bar >= 0.0)) {
        throw InvalidArgument("stage5_zbar_roots: populations must be >= 0");
    }
    require_above_singularity(params, x_bar, y_bar, "stage5_zbar_roots");

    const double a1 = params.curve_x.a, b1 = params.curve_x.b;
    const double a2 = params.curve_y.a, b2 = params.curve_y.b;
    const double th = params.theta;

    const double qa = th - x_bar * a1 - y_bar * a2; // < 0 above the line
    const double qb = th * (b1 + b2) - x_bar * a1 * b2 - y_bar * a2 * b1;
    const double qc = th * b1 * b2;

    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) {
        throw NumericalFailure("stage5_zbar_roots: no real substrate solution");
    }
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    double r1 = q / qa;
    double r2 = (q != 0.0) ? qc / q : 0.0;
    if (r1 < r2) std::swap(r1, r2); // keep the positive root first
    return {r1, r2};
}

double stage5_zbar(const ChemostatParams& params, double x_bar, double y_bar) {
    if (!(x_bar >= 0.0) || !(y_bar >= 0.0)) {
        throw InvalidArgument("stage5_zbar: populations must be >= 0");
    }
    require_above_singularity(params, x_bar, y_bar, "stage5_zbar");
    if (no_death(params)) {
        const auto [kept, discarded] = stage5_zbar_roots(params, x_bar, y_bar);
        if (!(kept > 0.0)) {
            throw NumericalFailure("stage5_zbar: no positive substrate root");
        }
        (void)discarded;
        return kept;
    }
    return consumed_rate_root(params, x_bar, y_bar);
}

double singularity_line(const ChemostatParams& params, double x_bar) {
    if (!(x_bar >= 0.0)) throw InvalidArgument("singularity_line: x must be >= 0");
    const double a2 = effective_a2(params);
    if (!(a2 > 0.0)) throw InvalidArgument("singularity_line: requires a2 - gamma2 > 0");
    return (params.theta - x_bar * effective_a1(params)) / a2;
}

namespace {

struct SingularityHit {
    double t;
    double x, y;
};

} // namespace

ReducedTrajectory stage5_integrate(const ChemostatParams& params, const ReducedState& r0,
                                   double t_end, const Stage5Options& options) {
    if (!(t_end > 0.0)) throw InvalidArgument("stage5_integrate: t_end must be > 0");
    const double restriction = r0.x * effective_a1(params) + r0.y * effective_a2(params);
    if (!(restriction > params.theta)) {
        throw InvalidArgument(
            "stage5_integrate: initial state violates x a1 + y a2 > theta");
    }

    detail::Rk45Options<2> opt;
    opt.rel_tol = options.rel_tol;
    opt.abs_tol = {options.abs_tol, options.abs_tol};
    opt.initial_dt = 1e-6;

    auto deriv = [&](double t, const std::array<double, 2>& v) {
        const double guard = singularity_line(params, std::max(v[0], 0.0)) +
                             options.singularity_guard;
        if (v[1] < guard) {
            std::ostringstream os;
            os << "stage5_integrate: singularity guard reached at t=" << t << ", state=("
               << v[0] << ", " << v[1] << ")";
            throw NumericalFailure(os.str(), t);
        }
        const double z = stage5_zbar(params, std::max(v[0], 0.0), std::max(v[1], 0.0));
        return std::array<double, 2>{
            v[0] * (params.curve_x.rate(z) - params.theta),
            v[1] * (params.curve_y.rate(z) - params.theta),
        };
    };
    auto reject = [](const std::array<double, 2>& v) { return v[0] < -1e-12 || v[1] < -1e-12; };
    auto clamp = [](std::array<double, 2>& v) {
        for (double& c : v) {
            if (c < 0.0) c = 0.0;
        }
    };
    auto no_observe = [](double, const std::array<double, 2>&) {};

    ReducedTrajectory traj;
    std::array<double, 2> v{r0.x, r0.y};
    traj.times.push_back(0.0);
    traj.states.push_back(r0);
    traj.zbars.push_back(stage5_zbar(params, r0.x, r0.y));

    double dt_hint = 0.0;
    double t = 0.0;
    while (t < t_end) {
        const double t_next =
            options.output_dt > 0.0 ? std::min(t + options.output_dt, t_end) : t_end;
        v = detail::rk45_integrate<2>(deriv, v, t, t_next, opt, no_observe, reject, clamp,
                                      &dt_hint);
        t = t_next;
        traj.times.push_back(t);
        traj.states.push_back(ReducedState{v[0], v[1]});
        traj.zbars.push_back(stage5_zbar(params, v[0], v[1]));
    }
    return traj;
}

ReducedTrajectory stage5_simulate_sde(const ChemostatParams& params, const ReducedState& r0,
                                      double dt, double t_end, std::uint64_t seed,
                                      std::uint64_t path_index, std::uint64_t output_stride) {
    validate_params(params);
    if (!(dt > 0.0) || !(t_end >= dt)) {
        throw InvalidArgument("stage5_simulate_sde: need dt > 0 and t_end >= dt");
    }

    const auto n_steps = static_cast<std::uint64_t>(std::llround(t_end / dt));
    const double sqrt_dt = std::sqrt(dt);

    ReducedTrajectory traj;
    double x = r0.x, y = r0.y;
    traj.times.push_back(0.0);
    traj.states.push_back(r0);
    traj.zbars.push_back(stage5_zbar(params, x, y));

    for (std::uint64_t n = 0; n < n_steps; ++n) {
        const double z = stage5_zbar(params, x, y);
        const double fx = params.curve_x.rate(z) - params.theta;
        const double gy = params.curve_y.rate(z) - params.theta;

        double nx = x + dt * x * fx;
        double ny = y + dt * y * gy;
        if (const auto* g = std::get_if<GeneralNoise>(&params.noise)) {
            nx += g->sigma1 * x * sqrt_dt * rng::standard_normal(seed, path_index, n, 0);
            ny += g->sigma2 * y * sqrt_dt * rng::standard_normal(seed, path_index, n, 1);
        } else if (const auto* d = std::get_if<DilutionNoise>(&params.noise)) {
            const double dw = sqrt_dt * rng::standard_normal(seed, path_index, n, 0);
            nx -= d->sigma * x * dw;
            ny -= d->sigma * y * dw;
        }
        x = std::max(nx, 0.0);
        y = std::max(ny, 0.0);
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw NumericalFailure("stage5_simulate_sde: non-finite state",
                                   static_cast<double>(n + 1) * dt);
        }
        if ((n + 1) % output_stride == 0 || n + 1 == n_steps) {
            traj.times.push_back(static_cast<double>(n + 1) * dt);
            traj.states.push_back(ReducedState{x, y});
            traj.zbars.push_back(stage5_zbar(params, x, y));
        }
    }
    return traj;
}

StagePlan make_stage_plan(const ChemostatParams& params, double M1, double M2, double z0) {
    StagePlan plan;
    plan.M1 = M1;
    plan.M2 = M2;
    plan.z0 = z0;
    plan.matching = matching_constants(params, M1, M2);
    plan.terminal = find_t0_prime(params, plan.matching.mu1, plan.matching.mu2);
    plan.z_infinity = consumed_rate_root(params, plan.terminal.x0_prime, plan.terminal.y0_prime);
    return plan;
}

namespace {

/// Least-squares slope of log(values) against times.
double log_slope(const std::vector<double>& times, const std::vector<double>& values) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto n = static_cast<double>(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double lx = times[i];
        const double ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

std::vector<CompositeRow> composite_vs_full(const ChemostatParams& params_template, double M1,
                                            double M2, double z0,
                                            const std::vector<double>& zf_ladder,
                                            double t_bar_end) {
    if (zf_ladder.empty()) throw InvalidArgument("composite_vs_full: empty ladder");

    std::vector<CompositeRow> rows;
    for (double zf : zf_ladder) {
        ChemostatParams p = params_template;
        p.z_f = zf;
        require_growth_regime(p, "composite_vs_full");

        CompositeRow row;
        row.z_f = zf;
        row.slope_x_target = effective_a1(p) - p.theta;
        row.slope_y_target = effective_a2(p) - p.theta;

        const StagePlan plan = make_stage_plan(p, M1, M2, z0);
        const double t_total = plan.matching.L + plan.terminal.t0_prime + t_bar_end;

        OdeControls controls;
        controls.output_dt = t_total / 4000.0;
        const OdeTrajectory full = integrate_ode(p, State{M1, M2, z0}, t_total, controls);

        // stage-2 exponent fit over the window where growth is clean exponential
        std::vector<double> ts, xs, ys;
        for (std::size_t i = 0; i < full.times.size(); ++i) {
            const double t = full.times[i];
            if (t < 0.05 * plan.matching.L || t > 0.6 * plan.matching.L) continue;
            if (full.states[i].x <= 0.0 || full.states[i].y <= 0.0) continue;
            ts.push_back(t);
            xs.push_back(full.states[i].x);
            ys.push_back(full.states[i].y);
        }
        if (ts.size() < 8) throw NumericalFailure("composite_vs_full: stage-2 window too short");
        row.slope_x = log_slope(ts, xs);
        row.slope_y = log_slope(ts, ys);

        double z_min = full.states.front().z;
        for (const State& s : full.states) z_min = std::min(z_min, s.z);
        row.substrate_min_full = z_min;

        Stage5Options s5opt;
        s5opt.output_dt = t_bar_end / 400.0;
        const ReducedTrajectory reduced = stage5_integrate(
            p, ReducedState{plan.terminal.x0_prime, plan.terminal.y0_prime}, t_bar_end, s5opt);

        double z_min_comp = plan.z_infinity;
        for (double zb : reduced.zbars) z_min_comp = std::min(z_min_comp, zb);
        row.substrate_min_composite = z_min_comp;
        row.substrate_min_rel_err = std::abs(z_min_comp - z_min) / std::max(z_min, 1e-300);

        const State& fin = full.states.back();
        const ReducedState& rfin = reduced.final_state();
        row.endpoint_distance = std::hypot(fin.x / zf - rfin.x, fin.y / zf - rfin.y);
        rows.push_back(row);
    }
    return rows;
}

} // namespace chemostat
