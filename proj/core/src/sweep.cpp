#include "chemostat/sweep.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "chemostat/errors.hpp"

namespace chemostat {

std::string to_string(SweepLabel label) {
    switch (label) {
        case SweepLabel::x_survives: return "x";
        case SweepLabel::y_survives: return "y";
        case SweepLabel::both_washout: return "both-washout";
        case SweepLabel::coexist_at_line: return "coexist-at-line";
        case SweepLabel::undecided: return "undecided";
        case SweepLabel::numerical_failure: return "numerical-failure";
    }
    return "undecided";
}

namespace {

void apply_param(ChemostatParams& p, const std::string& name, double value) {
    if (name == "theta") p.theta = value;
    else if (name == "z_f") p.z_f = value;
    else if (name == "a1") p.curve_x.a = value;
    else if (name == "b1") p.curve_x.b = value;
    else if (name == "gamma1") p.curve_x.gamma = value;
    else if (name == "a2") p.curve_y.a = value;
    else if (name == "b2") p.curve_y.b = value;
    else if (name == "gamma2") p.curve_y.gamma = value;
    else throw InvalidArgument("survivor_sweep: unknown parameter '" + name + "'");
}

SweepLabel classify(const ChemostatParams& p, const State& s, const SweepOptions& opt) {
    const double threshold = opt.extinction_threshold_rel * p.z_f;
    const State d = rhs(p, s);
    const bool x_out = s.x < threshold && d.x <= 0.0;
    const bool y_out = s.y < threshold && d.y <= 0.0;
    if (x_out && y_out) return SweepLabel::both_washout;
    if (x_out) return SweepLabel::y_survives;
    if (y_out) return SweepLabel::x_survives;
    if (std::abs(p.theta - 1.0) <= opt.theta_one_tol) return SweepLabel::coexist_at_line;
    return SweepLabel::undecided;
}

} // namespace

SweepResult survivor_sweep(const ChemostatParams& base, const SweepAxis& axis1,
                           const SweepAxis& axis2, const SweepOptions& options) {
    if (axis1.values.empty() || axis2.values.empty()) {
        throw InvalidArgument("survivor_sweep: axes must be non-empty");
    }

    SweepResult result;
    result.axis1 = axis1;
    result.axis2 = axis2;
    result.cells.resize(axis1.values.size() * axis2.values.size());

    auto run_cell = [&](std::size_t idx) {
        const std::size_t i = idx / axis2.values.size();
        const std::size_t j = idx % axis2.values.size();
        SweepCell& cell = result.cells[idx];
        cell.value1 = axis1.values[i];
        cell.value2 = axis2.values[j];

        ChemostatParams p = base;
        try {
            apply_param(p, axis1.param, cell.value1);
            apply_param(p, axis2.param, cell.value2);
            validate_params(p);
            const double half = 0.5 * (p.z_f - 1.0);
            const State s0{half, half, 1.0};
            OdeTrajectory traj = integrate_ode(p, s0, options.t_end, options.controls);
            cell.final_state = traj.final_state();
            cell.label = classify(p, cell.final_state, options);
        } catch (const std::exception& e) {
            cell.label = SweepLabel::numerical_failure;
            cell.note = e.what();
        }
    };

    unsigned n_threads = options.n_threads > 0
                             ? static_cast<unsigned>(options.n_threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, result.cells.size());

    if (n_threads <= 1) {
        for (std::size_t idx = 0; idx < result.cells.size(); ++idx) run_cell(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t idx = next.fetch_add(1); idx < result.cells.size();
                     idx = next.fetch_add(1)) {
                    run_cell(idx);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

} // namespace chemostat
