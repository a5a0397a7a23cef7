#include "chemostat/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "chemostat/errors.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

std::string to_string(SdeScheme scheme) {
    return scheme == SdeScheme::euler_maruyama ? "euler-maruyama" : "milstein";
}

DriftDiffusion drift_diffusion(const ChemostatParams& params, const State& s) {
    DriftDiffusion dd;
    dd.drift = rhs(params, s);
    if (const auto* g = std::get_if<GeneralNoise>(&params.noise)) {
        dd.n_wieners = 3;
        dd.columns[0] = State{g->sigma1 * s.x, 0.0, 0.0};
        dd.columns[1] = State{0.0, g->sigma2 * s.y, 0.0};
        dd.columns[2] = State{0.0, 0.0, g->sigma3 * s.z};
    } else if (const auto* d = std::get_if<DilutionNoise>(&params.noise)) {
        dd.n_wieners = 1;
        dd.columns[0] = State{-d->sigma * s.x, -d->sigma * s.y, d->sigma * (params.z_f - s.z)};
    }
    return dd;
}

namespace {

void check_wiener_dim(const ChemostatParams& params, std::span<const double> dW,
                      const char* where) {
    if (static_cast<int>(dW.size()) != wiener_dimension(params.noise)) {
        throw InvalidArgument(std::string(where) + ": Wiener increment count does not match noise spec");
    }
}

} // namespace

State step_euler_maruyama(const ChemostatParams& params, const State& s, double dt,
                          std::span<const double> dW) {
    check_wiener_dim(params, dW, "step_euler_maruyama");
    const DriftDiffusion dd = drift_diffusion(params, s);
    State out = s + dt * dd.drift;
    for (int c = 0; c < dd.n_wieners; ++c) out = out + dW[c] * dd.columns[c];
    return out;
}

State step_milstein(const ChemostatParams& params, const State& s, double dt,
                    std::span<const double> dW) {
    check_wiener_dim(params, dW, "step_milstein");
    State out = step_euler_maruyama(params, s, dt, dW);
    if (const auto* g = std::get_if<GeneralNoise>(&params.noise)) {
        out.x += 0.5 * g->sigma1 * g->sigma1 * s.x * (dW[0] * dW[0] - dt);
        out.y += 0.5 * g->sigma2 * g->sigma2 * s.y * (dW[1] * dW[1] - dt);
        out.z += 0.5 * g->sigma3 * g->sigma3 * s.z * (dW[2] * dW[2] - dt);
    } else if (const auto* d = std::get_if<DilutionNoise>(&params.noise)) {
        // (b . grad) b for b = (-s x, -s y, s (z_f - z))
        const double corr = 0.5 * d->sigma * d->sigma * (dW[0] * dW[0] - dt);
        out.x += corr * s.x;
        out.y += corr * s.y;
        out.z -= corr * (params.z_f - s.z);
    }
    return out;
}

namespace {

struct StepResult {
    State state;
    long clamps = 0;
};

inline StepResult advance(const ChemostatParams& params, const State& s, double dt,
                          std::span<const double> dW, SdeScheme scheme) {
    StepResult r;
    r.state = scheme == SdeScheme::euler_maruyama ? step_euler_maruyama(params, s, dt, dW)
                                                  : step_milstein(params, s, dt, dW);
    auto clamp = [&r](double& v) {
        if (v < 0.0) {
            v = 0.0;
            ++r.clamps;
        }
    };
    clamp(r.state.x);
    clamp(r.state.y);
    clamp(r.state.z);
    return r;
}

} // namespace

SdeTrajectory simulate(const ChemostatParams& params, const State& s0, const SimOptions& opts) {
    validate_params(params);
    if (!(opts.dt > 0.0)) throw InvalidArgument("simulate: dt must be > 0");
    if (!(opts.t_end >= opts.dt)) throw InvalidArgument("simulate: t_end must be >= dt");

    const auto n_steps = static_cast<std::uint64_t>(std::llround(opts.t_end / opts.dt));
    const int n_w = wiener_dimension(params.noise);
    const double sqrt_dt = std::sqrt(opts.dt);
    const double threshold = opts.extinction_threshold_rel * params.z_f;

    SdeTrajectory traj;
    traj.seed = opts.seed;
    traj.path_index = opts.path_index;
    traj.scheme = opts.scheme;
    traj.dt = opts.dt;

    State s = s0;
    traj.times.push_back(0.0);
    traj.states.push_back(s);
    bool x_extinct = s.x < threshold;
    bool y_extinct = s.y < threshold;

    std::array<double, 3> dw{};
    for (std::uint64_t n = 0; n < n_steps; ++n) {
        for (int c = 0; c < n_w; ++c) {
            dw[c] = sqrt_dt * rng::standard_normal(opts.seed, opts.path_index, n, c);
        }
        const StepResult r =
            advance(params, s, opts.dt, std::span<const double>(dw.data(), n_w), opts.scheme);
        s = r.state;
        traj.clamp_count += r.clamps;
        traj.n_steps = n + 1;
        const double t = static_cast<double>(n + 1) * opts.dt;

        if (!s.finite()) {
            std::ostringstream os;
            os << "simulate: non-finite state at step " << n + 1 << " (t=" << t << "): x=" << s.x
               << " y=" << s.y << " z=" << s.z;
            traj.failure = os.str();
            traj.times.push_back(t);
            traj.states.push_back(s);
            throw NumericalFailure(traj.failure, t);
        }

        if (!x_extinct && s.x < threshold) {
            x_extinct = true;
            traj.events.push_back({0, t});
        }
        if (!y_extinct && s.y < threshold) {
            y_extinct = true;
            traj.events.push_back({1, t});
        }

        const bool last = n + 1 == n_steps;
        const bool decided = opts.stop_when_decided && (x_extinct != y_extinct);
        if ((n + 1) % opts.output_stride == 0 || last || decided) {
            traj.times.push_back(t);
            traj.states.push_back(s);
        }
        if (decided) break;
    }
    traj.completed = true;
    return traj;
}

namespace {

void summarize(Ensemble& ens) {
    std::size_t grid = std::numeric_limits<std::size_t>::max();
    for (const auto& t : ens.trajectories) {
        if (t.completed) grid = std::min(grid, t.times.size());
    }
    if (grid == std::numeric_limits<std::size_t>::max()) return;

    std::vector<double> vals;
    for (std::size_t k = 0; k < grid; ++k) {
        EnsembleSummaryRow row;
        row.t = ens.trajectories.front().times[k];
        for (int comp = 0; comp < 3; ++comp) {
            vals.clear();
            for (const auto& t : ens.trajectories) {
                if (!t.completed) continue;
                const State& s = t.states[k];
                vals.push_back(comp == 0 ? s.x : comp == 1 ? s.y : s.z);
            }
            std::sort(vals.begin(), vals.end());
            const auto n = vals.size();
            double mean = 0.0;
            for (double v : vals) mean += v;
            row.mean[comp] = mean / static_cast<double>(n);
            auto quantile = [&](double q) {
                const double pos = q * static_cast<double>(n - 1);
                const auto lo = static_cast<std::size_t>(pos);
                const double frac = pos - static_cast<double>(lo);
                return lo + 1 < n ? vals[lo] * (1.0 - frac) + vals[lo + 1] * frac : vals[lo];
            };
            row.q05[comp] = quantile(0.05);
            row.q95[comp] = quantile(0.95);
        }
        ens.summary.push_back(row);
    }
}

} // namespace

Ensemble simulate_ensemble(const ChemostatParams& params, const State& s0,
                           const SimOptions& opts, int n_paths, int n_threads) {
    if (n_paths < 1) throw InvalidArgument("simulate_ensemble: n_paths must be >= 1");
    Ensemble ens;
    ens.trajectories.resize(static_cast<std::size_t>(n_paths));

    auto run_path = [&](int i) {
        SimOptions path_opts = opts;
        path_opts.path_index = static_cast<std::uint64_t>(i);
        auto& slot = ens.trajectories[static_cast<std::size_t>(i)];
        try {
            slot = simulate(params, s0, path_opts);
        } catch (const NumericalFailure& e) {
            slot.completed = false;
            if (slot.failure.empty()) slot.failure = e.what();
            slot.path_index = static_cast<std::uint64_t>(i);
        }
    };

    unsigned workers = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n_paths));
    if (workers <= 1) {
        for (int i = 0; i < n_paths; ++i) run_path(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n_paths; i = next.fetch_add(1)) run_path(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    const double threshold = opts.extinction_threshold_rel * params.z_f;
    for (const auto& t : ens.trajectories) {
        if (!t.completed) {
            ++ens.tally.failed;
            continue;
        }
        const State& fin = t.final_state();
        const bool x_out = fin.x < threshold;
        const bool y_out = fin.y < threshold;
        if (x_out && y_out) ++ens.tally.both_extinct;
        else if (y_out) ++ens.tally.x_wins;
        else if (x_out) ++ens.tally.y_wins;
        else ++ens.tally.undecided;
    }

    summarize(ens);
    return ens;
}

double deficit_diagnostic(const SdeTrajectory& traj, const ChemostatParams& params) {
    if (!std::holds_alternative<DilutionNoise>(params.noise)) {
        throw InvalidArgument("deficit_diagnostic: requires dilution-rate noise");
    }
    if (traj.scheme != SdeScheme::euler_maruyama) {
        throw InvalidArgument("deficit_diagnostic: identity holds for Euler-Maruyama only");
    }
    if (traj.states.empty()) throw InvalidArgument("deficit_diagnostic: empty trajectory");

    const double sigma = std::get<DilutionNoise>(params.noise).sigma;
    const double sqrt_dt = std::sqrt(traj.dt);
    const State& s0 = traj.states.front();
    double w = params.z_f - (s0.x + s0.y + s0.z);

    double max_dev = 0.0;
    std::size_t sample = 1;
    for (std::uint64_t n = 0; n < traj.n_steps && sample < traj.times.size(); ++n) {
        const double dW = sqrt_dt * rng::standard_normal(traj.seed, traj.path_index, n, 0);
        w = w * (1.0 - params.theta * traj.dt - sigma * dW);
        const double t = static_cast<double>(n + 1) * traj.dt;
        if (std::abs(t - traj.times[sample]) < 0.5 * traj.dt) {
            const State& s = traj.states[sample];
            const double observed = params.z_f - (s.x + s.y + s.z);
            max_dev = std::max(max_dev, std::abs(observed - w));
            ++sample;
        }
    }
    return max_dev;
}

namespace {

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

OrderStudyResult strong_order_chemostat(const ChemostatParams& params, const State& s0,
                                        double t_end, double dt0, int levels, int n_paths,
                                        SdeScheme scheme, std::uint64_t seed, int ref_refine) {
    validate_params(params);
    if (levels < 3) throw InvalidArgument("strong_order_chemostat: need at least 3 ladder levels");
    if (n_paths < 1 || ref_refine < 2) {
        throw InvalidArgument("strong_order_chemostat: bad path count or reference refinement");
    }

    const int n_w = wiener_dimension(params.noise);
    const std::uint64_t coarse_steps = static_cast<std::uint64_t>(std::llround(t_end / dt0));
    if (coarse_steps == 0) throw InvalidArgument("strong_order_chemostat: t_end < dt0");

    // fine grid carries the Brownian path; every level sums its increments
    const std::uint64_t fine_per_coarse = (1ull << (levels - 1)) * static_cast<std::uint64_t>(ref_refine);
    const std::uint64_t fine_steps = coarse_steps * fine_per_coarse;
    const double dt_fine = t_end / static_cast<double>(fine_steps);
    const double sqrt_fine = std::sqrt(dt_fine);

    std::vector<double> err_sum(static_cast<std::size_t>(levels), 0.0);
    std::vector<double> fine_dw(static_cast<std::size_t>(fine_steps) * static_cast<std::size_t>(std::max(n_w, 1)));

    for (int path = 0; path < n_paths; ++path) {
        for (std::uint64_t m = 0; m < fine_steps; ++m) {
            for (int c = 0; c < n_w; ++c) {
                fine_dw[m * n_w + c] =
                    sqrt_fine * rng::standard_normal(seed, static_cast<std::uint64_t>(path), m, static_cast<std::uint32_t>(c));
            }
        }

        auto run_level = [&](std::uint64_t group) {
            // one step consumes `group` fine increments
            const double dt = dt_fine * static_cast<double>(group);
            State s = s0;
            std::array<double, 3> dw{};
            for (std::uint64_t n = 0; n < fine_steps / group; ++n) {
                dw.fill(0.0);
                for (std::uint64_t m = n * group; m < (n + 1) * group; ++m) {
                    for (int c = 0; c < n_w; ++c) dw[c] += fine_dw[m * n_w + c];
                }
                StepResult r = advance(params, s, dt, std::span<const double>(dw.data(), n_w), scheme);
                s = r.state;
                if (!s.finite()) throw NumericalFailure("strong_order_chemostat: path blew up", static_cast<double>(n) * dt);
            }
            return s;
        };

        const State ref = run_level(1);
        for (int k = 0; k < levels; ++k) {
            const State sk = run_level(fine_per_coarse >> k);
            const State d = sk - ref;
            err_sum[static_cast<std::size_t>(k)] +=
                std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
        }
    }

    OrderStudyResult result;
    for (int k = 0; k < levels; ++k) {
        result.dts.push_back(dt0 / static_cast<double>(1ull << k));
        result.errors.push_back(err_sum[static_cast<std::size_t>(k)] / n_paths);
    }
    result.slope = fit_loglog_slope(result.dts, result.errors);
    return result;
}

OrderStudyResult strong_order_gbm(double drift, double vol, double x0, double t_end,
                                  double dt0, int levels, int n_paths, SdeScheme scheme,
                                  std::uint64_t seed) {
    if (levels < 3) throw InvalidArgument("strong_order_gbm: need at least 3 ladder levels");
    if (n_paths < 1) throw InvalidArgument("strong_order_gbm: n_paths must be >= 1");

    const std::uint64_t coarse_steps = static_cast<std::uint64_t>(std::llround(t_end / dt0));
    if (coarse_steps == 0) throw InvalidArgument("strong_order_gbm: t_end < dt0");
    const std::uint64_t fine_per_coarse = 1ull << (levels - 1);
    const std::uint64_t fine_steps = coarse_steps * fine_per_coarse;
    const double dt_fine = t_end / static_cast<double>(fine_steps);
    const double sqrt_fine = std::sqrt(dt_fine);

    std::vector<double> err_sum(static_cast<std::size_t>(levels), 0.0);
    std::vector<double> fine_dw(fine_steps);

    for (int path = 0; path < n_paths; ++path) {
        double w_total = 0.0;
        for (std::uint64_t m = 0; m < fine_steps; ++m) {
            fine_dw[m] = sqrt_fine * rng::standard_normal(seed, static_cast<std::uint64_t>(path), m, 0);
            w_total += fine_dw[m];
        }
        const double exact = x0 * std::exp((drift - 0.5 * vol * vol) * t_end + vol * w_total);

        for (int k = 0; k < levels; ++k) {
            const std::uint64_t group = fine_per_coarse >> k;
            const double dt = dt_fine * static_cast<double>(group);
            double x = x0;
            for (std::uint64_t n = 0; n < fine_steps / group; ++n) {
                double dw = 0.0;
                for (std::uint64_t m = n * group; m < (n + 1) * group; ++m) dw += fine_dw[m];
                double next = x + drift * x * dt + vol * x * dw;
                if (scheme == SdeScheme::milstein) next += 0.5 * vol * vol * x * (dw * dw - dt);
                x = next;
            }
            err_sum[static_cast<std::size_t>(k)] += std::abs(x - exact);
        }
    }

    OrderStudyResult result;
    for (int k = 0; k < levels; ++k) {
        result.dts.push_back(dt0 / static_cast<double>(1ull << k));
        result.errors.push_back(err_sum[static_cast<std::size_t>(k)] / n_paths);
    }
    result.slope = fit_loglog_slope(result.dts, result.errors);
    return result;
}

} // namespace chemostat
