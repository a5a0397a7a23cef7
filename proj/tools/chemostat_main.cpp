// Command-line driver: deterministic/stochastic chemostat runs, stability
// tables, parameter sweeps, staged asymptotics, Fokker-Planck densities and
// the figure recipes. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chemostat/asymptotics.hpp"
#include "chemostat/config.hpp"
#include "chemostat/csv.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/fokker_planck.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/recipes.hpp"
#include "chemostat/sde.hpp"
#include "chemostat/stability.hpp"
#include "chemostat/sweep.hpp"
#include "chemostat/version.hpp"

namespace {

using namespace chemostat;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool full = false;
};

ExperimentConfig resolve_config(const GlobalArgs& args, bool desk_default_zf) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) {
        cfg = load_config_file(args.config_path);
    } else {
        cfg = default_config();
        if (desk_default_zf && !args.full) cfg.params.z_f = 1500.0;
        if (args.full) cfg.run.dt = 1e-4;
    }
    if (args.seed_set) cfg.run.seed = args.seed;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    for (const auto& w : parameter_warnings(cfg.params)) {
        std::cerr << "warning: " << w << "\n";
    }
    return cfg;
}

long elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
    return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count());
}

void report(const RunManifest& manifest, const std::string& dir) {
    std::cout << manifest.recipe << ": " << manifest.outputs.size() << " file(s) under " << dir
              << " (" << manifest.wall_clock_ms << " ms)\n";
}

int run_simulate_ode(const GlobalArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(args, false);
    OdeControls controls;
    controls.output_dt = cfg.run.t_end / 2000.0;
    const OdeTrajectory traj =
        integrate_ode(cfg.params, cfg.initial.resolve(cfg.params), cfg.run.t_end, controls);
    OutputSession session;
    session.add("trajectory-0.csv", trajectory_csv(traj));
    const std::string dir = cfg.output_dir + "/simulate-ode";
    report(session.commit(dir, "simulate-ode", fnv1a64_hex(cfg.raw_text), elapsed_ms(t0)), dir);
    return 0;
}

int run_simulate_sde(const GlobalArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(args, true);
    if (std::holds_alternative<NoNoise>(cfg.params.noise)) {
        throw ConfigError("simulate-sde requires a noise spec (params/noise)");
    }
    SimOptions opts;
    opts.dt = cfg.run.dt;
    opts.t_end = cfg.run.t_end;
    opts.seed = cfg.run.seed;
    opts.scheme = cfg.run.scheme;
    opts.output_stride = cfg.run.output_stride;
    opts.stop_when_decided = cfg.run.stop_when_decided;

    const Ensemble ens =
        simulate_ensemble(cfg.params, cfg.initial.resolve(cfg.params), opts, cfg.run.n_paths);
    OutputSession session;
    session.add("summary-0.csv", ensemble_summary_csv(ens));
    session.add("events-0.csv", events_csv(ens));
    for (const auto& traj : ens.trajectories) {
        if (traj.completed) {
            session.add("trajectory-" + std::to_string(traj.path_index) + ".csv",
                        trajectory_csv(traj));
        } else {
            std::cerr << "path " << traj.path_index << " failed: " << traj.failure << "\n";
        }
    }
    std::cout << "tally: x=" << ens.tally.x_wins << " y=" << ens.tally.y_wins
              << " washout=" << ens.tally.both_extinct << " undecided=" << ens.tally.undecided
              << " failed=" << ens.tally.failed << "\n";
    const std::string dir = cfg.output_dir + "/simulate-sde";
    report(session.commit(dir, "simulate-sde", fnv1a64_hex(cfg.raw_text), elapsed_ms(t0)), dir);
    return ens.tally.failed > 0 ? 3 : 0;
}

int run_stability(const GlobalArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(args, false);
    const StabilityReport rep = stability_report(cfg.params);
    const std::string text = stability_text(rep);
    std::cout << text;
    OutputSession session;
    session.add("stability-0.txt", text);
    const std::string dir = cfg.output_dir + "/stability";
    report(session.commit(dir, "stability", fnv1a64_hex(cfg.raw_text), elapsed_ms(t0)), dir);
    return 0;
}

int run_sweep(const GlobalArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(args, true);
    if (cfg.sweep.values1.empty() || cfg.sweep.values2.empty()) {
        throw ConfigError("sweep requires sweep/values1 and sweep/values2");
    }
    SweepOptions opt;
    opt.t_end = cfg.sweep.t_end;
    const SweepResult result =
        survivor_sweep(cfg.params, SweepAxis{cfg.sweep.param1, cfg.sweep.values1},
                       SweepAxis{cfg.sweep.param2, cfg.sweep.values2}, opt);
    OutputSession session;
    session.add("sweep-0.csv", sweep_csv(result));
    const std::string dir = cfg.output_dir + "/sweep";
    report(session.commit(dir, "sweep", fnv1a64_hex(cfg.raw_text), elapsed_ms(t0)), dir);
    return 0;
}

int run_asymptotic(const GlobalArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(args, false);
    OutputSession session;

    const std::vector<double> ladder{1e3, 1e4, 1e5};
    session.add("errors-0.csv", composite_csv(composite_vs_full(cfg.params, 1.0, 1.0, 1.0, ladder)));

    Stage5Options s5opt;
    s5opt.output_dt = cfg.run.t_end / 400.0;
    const ReducedTrajectory s5 = stage5_integrate(
        cfg.params, ReducedState{cfg.initial.x_bar, cfg.initial.y_bar}, cfg.run.t_end, s5opt);
    session.add("stage5-0.csv", reduced_trajectory_csv(s5));

    const std::string dir = cfg.output_dir + "/asymptotic";
    report(session.commit(dir, "asymptotic", fnv1a64_hex(cfg.raw_text), elapsed_ms(t0)), dir);
    return 0;
}

int run_fokker_planck(const GlobalArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(args, false);
    if (std::holds_alternative<NoNoise>(cfg.params.noise)) {
        throw ConfigError("fokker-planck requires a noise spec (params/noise)");
    }
    const FpControls& fc = cfg.fokker_planck;
    const PolygonDomain domain =
        build_domain(cfg.params, fc.x_max, fc.y_max, fc.cut_offset, fc.h, fc.h);
    const FpOperator op = apply_boundaries(assemble_operator(cfg.params, domain), domain);
    DensityField field = gaussian_initial(domain, cfg.initial.x_bar, cfg.initial.y_bar);
    FpStepper stepper(op, domain, fc.dt, fc.scheme);

    std::vector<double> snapshots = fc.snapshot_times;
    if (snapshots.empty()) snapshots.push_back(fc.t_end);
    std::sort(snapshots.begin(), snapshots.end());

    OutputSession session;
    int k = 0;
    for (double t_snap : snapshots) {
        stepper.advance(field, t_snap);
        session.add("density-" + std::to_string(k) + ".csv", density_csv(domain, field));
        session.add("density-" + std::to_string(k) + ".json",
                    density_metadata_json(domain, field, cfg.params));
        const FpDiagnostics diag = diagnostics(domain, field);
        session.add("marginal-x-" + std::to_string(k) + ".csv",
                    marginal_csv(diag.marginal_x, "x"));
        session.add("marginal-y-" + std::to_string(k) + ".csv",
                    marginal_csv(diag.marginal_y, "y"));
        ++k;
    }
    session.add("ledger-0.csv", mass_ledger_csv(field));
    std::cout << "final mass: " << format_double(total_mass(domain, field)) << " at t=" << field.time
              << "\n";
    const std::string dir = cfg.output_dir + "/fokker-planck";
    report(session.commit(dir, "fokker-planck", fnv1a64_hex(cfg.raw_text), elapsed_ms(t0)), dir);
    return 0;
}

int run_convergence_cmd(const GlobalArgs& args) {
    ExperimentConfig cfg = resolve_config(args, true);
    const RunManifest manifest = run_recipe("convergence", cfg, args.full);
    report(manifest, cfg.output_dir + "/convergence");
    return 0;
}

int run_recipe_cmd(const GlobalArgs& args, const std::string& name) {
    ExperimentConfig cfg = resolve_config(args, true);
    const RunManifest manifest = run_recipe(name, cfg, args.full);
    report(manifest, cfg.output_dir + "/" + name);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-population chemostat simulation toolkit"};
    app.set_version_flag("--version", std::string(chemostat::kArtifactVersion));

    GlobalArgs args;
    app.add_option("--config", args.config_path, "JSON experiment configuration");
    app.add_option("--out", args.out_dir, "output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", args.seed, "seed override");
    app.add_flag("--full", args.full, "paper-scale horizons instead of desk scale");
    app.require_subcommand(1);

    auto* ode = app.add_subcommand("simulate-ode", "deterministic trajectory");
    auto* sde = app.add_subcommand("simulate-sde", "stochastic ensemble");
    auto* stab = app.add_subcommand("stability", "steady states and eigenvalues");
    auto* sweep = app.add_subcommand("sweep", "survivor map over a parameter grid");
    auto* asym = app.add_subcommand("asymptotic", "staged asymptotics vs full system");
    auto* fp = app.add_subcommand("fokker-planck", "2D density evolution");
    auto* conv = app.add_subcommand("convergence", "strong-order studies");
    auto* recipe = app.add_subcommand("recipe", "figure-keyed experiment recipe");
    std::string recipe_name;
    recipe->add_option("name", recipe_name, "recipe name")->required();

    try {
        app.parse(argc, argv);
        args.seed_set = seed_opt->count() > 0;

        if (ode->parsed()) return run_simulate_ode(args);
        if (sde->parsed()) return run_simulate_sde(args);
        if (stab->parsed()) return run_stability(args);
        if (sweep->parsed()) return run_sweep(args);
        if (asym->parsed()) return run_asymptotic(args);
        if (fp->parsed()) return run_fokker_planck(args);
        if (conv->parsed()) return run_convergence_cmd(args);
        if (recipe->parsed()) return run_recipe_cmd(args, recipe_name);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const chemostat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const chemostat::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const chemostat::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
