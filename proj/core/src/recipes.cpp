#include "chemostat/recipes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "chemostat/csv.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/version.hpp"

namespace chemostat {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// output session and manifest
// ---------------------------------------------------------------------------

void OutputSession::add(const std::string& relpath, std::string content) {
    if (has(relpath)) throw InvalidArgument("OutputSession: duplicate output " + relpath);
    files_.emplace_back(relpath, std::move(content));
}

bool OutputSession::has(const std::string& relpath) const {
    return std::any_of(files_.begin(), files_.end(),
                       [&](const auto& f) { return f.first == relpath; });
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["artifact_version"] = m.artifact_version;
    j["recipe"] = m.recipe;
    j["config_hash"] = m.config_hash;
    j["wall_clock_ms"] = m.wall_clock_ms;
    j["status"] = m.status;
    j["outputs"] = json::array();
    for (const auto& e : m.outputs) {
        j["outputs"].push_back({{"path", e.path}, {"bytes", e.bytes}, {"checksum", e.checksum}});
    }
    return j.dump(2) + "\n";
}

RunManifest OutputSession::commit(const std::string& dir, const std::string& recipe,
                                  const std::string& config_hash, long wall_clock_ms) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    try {
        fs::create_directories(root);
        // a stale marker from an earlier run must not survive a failed commit
        if (fs::exists(manifest_path)) fs::remove(manifest_path);

        RunManifest manifest;
        manifest.artifact_version = kArtifactVersion;
        manifest.recipe = recipe;
        manifest.config_hash = config_hash;
        manifest.wall_clock_ms = wall_clock_ms;
        manifest.status = "complete";

        for (const auto& [rel, content] : files_) {
            const fs::path p = root / rel;
            fs::create_directories(p.parent_path());
            std::ofstream out(p, std::ios::binary);
            if (!out) throw NumericalFailure("commit: cannot open " + p.string());
            out << content;
            if (!out) throw NumericalFailure("commit: write failed for " + p.string());
            manifest.outputs.push_back({rel, content.size(), fnv1a64_hex(content)});
        }

        std::ofstream mout(manifest_path, std::ios::binary);
        if (!mout) throw NumericalFailure("commit: cannot open manifest");
        mout << manifest_json(manifest);
        if (!mout) throw NumericalFailure("commit: manifest write failed");
        return manifest;
    } catch (...) {
        std::error_code ec;
        fs::remove(manifest_path, ec);
        throw;
    }
}

RunManifest load_manifest(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!in) throw ConfigError("load_manifest: no manifest.json under " + dir);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("load_manifest: invalid manifest: ") + e.what());
    }
    RunManifest m;
    m.schema_version = j.value("schema_version", 1);
    m.artifact_version = j.value("artifact_version", "");
    m.recipe = j.value("recipe", "");
    m.config_hash = j.value("config_hash", "");
    m.wall_clock_ms = j.value("wall_clock_ms", 0L);
    m.status = j.value("status", "");
    for (const auto& e : j.value("outputs", json::array())) {
        m.outputs.push_back({e.value("path", ""), e.value("bytes", std::uint64_t{0}),
                             e.value("checksum", "")});
    }
    return m;
}

std::vector<std::string> verify_manifest(const std::string& dir, const RunManifest& manifest) {
    std::vector<std::string> bad;
    for (const auto& e : manifest.outputs) {
        const fs::path p = fs::path(dir) / e.path;
        if (!fs::exists(p)) {
            bad.push_back(e.path);
            continue;
        }
        if (file_checksum(p.string()) != e.checksum) bad.push_back(e.path);
    }
    return bad;
}

// ---------------------------------------------------------------------------
// CSV renderers
// ---------------------------------------------------------------------------

std::string trajectory_csv(const OdeTrajectory& traj) {
    CsvWriter w({"t", "x", "y", "z"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        w.add_row({traj.times[i], traj.states[i].x, traj.states[i].y, traj.states[i].z});
    }
    return w.text();
}

std::string trajectory_csv(const SdeTrajectory& traj) {
    CsvWriter w({"t", "x", "y", "z"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        w.add_row({traj.times[i], traj.states[i].x, traj.states[i].y, traj.states[i].z});
    }
    return w.text();
}

std::string ensemble_summary_csv(const Ensemble& ensemble) {
    CsvWriter w({"t", "mean_x", "q05_x", "q95_x", "mean_y", "q05_y", "q95_y", "mean_z", "q05_z",
                 "q95_z"});
    for (const auto& row : ensemble.summary) {
        w.add_row({row.t, row.mean[0], row.q05[0], row.q95[0], row.mean[1], row.q05[1],
                   row.q95[1], row.mean[2], row.q05[2], row.q95[2]});
    }
    return w.text();
}

std::string events_csv(const Ensemble& ensemble) {
    CsvWriter w({"path", "population", "t_extinct"});
    for (const auto& traj : ensemble.trajectories) {
        for (const auto& ev : traj.events) {
            w.add_row({static_cast<double>(traj.path_index), static_cast<double>(ev.population),
                       ev.time});
        }
    }
    return w.text();
}

std::string sweep_csv(const SweepResult& sweep) {
    CsvWriter w({"param1", "param2", "survivor_label", "final_x", "final_y", "final_z"});
    for (const auto& cell : sweep.cells) {
        w.add_row({format_double(cell.value1), format_double(cell.value2),
                   to_string(cell.label), format_double(cell.final_state.x),
                   format_double(cell.final_state.y), format_double(cell.final_state.z)});
    }
    return w.text();
}

std::string density_csv(const PolygonDomain& domain, const DensityField& field) {
    CsvWriter w({"i", "j", "x", "y", "p"});
    for (int idx = 0; idx < domain.n_active(); ++idx) {
        const int flat = domain.cells[static_cast<std::size_t>(idx)];
        const int i = flat % domain.nx;
        const int j = flat / domain.nx;
        w.add_row({static_cast<double>(i), static_cast<double>(j), domain.x_center(i),
                   domain.y_center(j), field.p[idx]});
    }
    return w.text();
}

std::string density_metadata_json(const PolygonDomain& domain, const DensityField& field,
                                  const ChemostatParams& params) {
    json j;
    j["time"] = field.time;
    j["total_mass"] = total_mass(domain, field);
    j["grid"] = {{"hx", domain.hx},     {"hy", domain.hy},          {"nx", domain.nx},
                 {"ny", domain.ny},     {"x_max", domain.x_max},    {"y_max", domain.y_max},
                 {"cut_offset", domain.cut_offset}, {"active_cells", domain.n_active()}};
    j["params"] = {{"theta", params.theta},
                   {"z_f", params.z_f},
                   {"curve_x", {{"a", params.curve_x.a}, {"b", params.curve_x.b}, {"gamma", params.curve_x.gamma}}},
                   {"curve_y", {{"a", params.curve_y.a}, {"b", params.curve_y.b}, {"gamma", params.curve_y.gamma}}}};
    if (const auto* g = std::get_if<GeneralNoise>(&params.noise)) {
        j["params"]["noise"] = {{"kind", "general"}, {"sigma1", g->sigma1}, {"sigma2", g->sigma2},
                                {"sigma3", g->sigma3}};
    } else if (const auto* d = std::get_if<DilutionNoise>(&params.noise)) {
        j["params"]["noise"] = {{"kind", "dilution"}, {"sigma", d->sigma}};
    } else {
        j["params"]["noise"] = {{"kind", "none"}};
    }
    return j.dump(2) + "\n";
}

std::string marginal_csv(const Marginal& marginal, const std::string& coordinate_name) {
    CsvWriter w({coordinate_name, "density"});
    for (std::size_t i = 0; i < marginal.coordinate.size(); ++i) {
        w.add_row({marginal.coordinate[i], marginal.density[i]});
    }
    return w.text();
}

std::string mass_ledger_csv(const DensityField& field) {
    CsvWriter w({"t", "mass", "clipped"});
    for (const auto& e : field.ledger) w.add_row({e.t, e.mass, e.clipped});
    return w.text();
}

std::string order_study_csv(const OrderStudyResult& result, const std::string& label) {
    CsvWriter w({"label", "dt", "strong_error", "slope"});
    for (std::size_t i = 0; i < result.dts.size(); ++i) {
        w.add_row({label, format_double(result.dts[i]), format_double(result.errors[i]),
                   format_double(result.slope)});
    }
    return w.text();
}

std::string composite_csv(const std::vector<CompositeRow>& rows) {
    CsvWriter w({"z_f", "stage", "sup_rel_err"});
    for (const auto& r : rows) {
        w.add_row({format_double(r.z_f), "stage2-exponent-x",
                   format_double(std::abs(r.slope_x - r.slope_x_target) /
                                 std::abs(r.slope_x_target))});
        w.add_row({format_double(r.z_f), "stage2-exponent-y",
                   format_double(std::abs(r.slope_y - r.slope_y_target) /
                                 std::abs(r.slope_y_target))});
        w.add_row({format_double(r.z_f), "stage4-substrate-min",
                   format_double(r.substrate_min_rel_err)});
        w.add_row({format_double(r.z_f), "stage5-endpoint", format_double(r.endpoint_distance)});
    }
    return w.text();
}

std::string stability_text(const StabilityReport& report) {
    std::ostringstream os;
    for (const auto& s : report.states) {
        os << s.name << ": ";
        if (!s.exists) {
            os << "absent";
        } else {
            os << "lambda = (" << format_double(s.eigenvalues[0]) << ", "
               << format_double(s.eigenvalues[1]) << ") -> " << s.verdict;
        }
        for (const auto& c : s.conditions) os << " [" << c << "]";
        os << "\n";
    }
    return os.str();
}

std::string reduced_trajectory_csv(const ReducedTrajectory& traj) {
    CsvWriter w({"t", "x_bar", "y_bar", "z_bar"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        w.add_row({traj.times[i], traj.states[i].x, traj.states[i].y, traj.zbars[i]});
    }
    return w.text();
}

// ---------------------------------------------------------------------------
// recipes
// ---------------------------------------------------------------------------

namespace {

GrowthCurve table1_x() { return GrowthCurve{2.911, 1.911, 0.0}; }
GrowthCurve table1_y() { return GrowthCurve{1.636, 0.636, 0.0}; }
GrowthCurve table3_x() { return GrowthCurve{2.512, 0.041, 1.41306}; }
GrowthCurve table3_y() { return GrowthCurve{1.411, 0.204, 0.171927}; }

struct SdePanel {
    std::string label;
    double theta;
    NoiseSpec noise;
    double t_end_desk;
    double t_end_full;
    int n_paths;
};

void run_sde_panels(OutputSession& session, const ExperimentConfig& config, bool full,
                    const std::vector<SdePanel>& panels, bool death_curves) {
    CsvWriter panel_index({"label", "theta", "noise", "t_end", "n_paths", "dt"});
    for (const auto& panel : panels) {
        ChemostatParams p;
        p.curve_x = death_curves ? table3_x() : table1_x();
        p.curve_y = death_curves ? table3_y() : table1_y();
        p.z_f = config.params.z_f;
        p.theta = panel.theta;
        p.noise = panel.noise;

        SimOptions opts;
        opts.dt = config.run.dt;
        opts.t_end = full ? panel.t_end_full : panel.t_end_desk;
        opts.seed = config.run.seed;
        opts.scheme = config.run.scheme;
        opts.stop_when_decided = true;
        const auto n_steps = static_cast<std::uint64_t>(std::llround(opts.t_end / opts.dt));
        opts.output_stride = std::max<std::uint64_t>(1, n_steps / 2000);

        const State s0 = config.initial.resolve(p);
        const Ensemble ens = simulate_ensemble(p, s0, opts, panel.n_paths);

        session.add("summary-" + panel.label + ".csv", ensemble_summary_csv(ens));
        session.add("events-" + panel.label + ".csv", events_csv(ens));
        for (const auto& traj : ens.trajectories) {
            if (!traj.completed) continue;
            session.add("trajectory-" + panel.label + "-" + std::to_string(traj.path_index) +
                            ".csv",
                        trajectory_csv(traj));
        }

        std::string noise_desc = "none";
        if (const auto* g = std::get_if<GeneralNoise>(&p.noise)) {
            noise_desc = "general(" + format_double(g->sigma1) + ";" + format_double(g->sigma2) +
                         ";" + format_double(g->sigma3) + ")";
        } else if (const auto* d = std::get_if<DilutionNoise>(&p.noise)) {
            noise_desc = "dilution(" + format_double(d->sigma) + ")";
        }
        panel_index.add_row({panel.label, format_double(panel.theta), noise_desc,
                             format_double(opts.t_end), std::to_string(panel.n_paths),
                             format_double(opts.dt)});
    }
    session.add("panels.csv", panel_index.text());
}

struct FpPanel {
    std::string label;
    double theta;
    NoiseSpec noise;
    std::vector<double> snapshots_desk;
    std::vector<double> snapshots_full;
};

void run_fp_panels(OutputSession& session, const ExperimentConfig& config, bool full,
                   const std::vector<FpPanel>& panels) {
    for (const auto& panel : panels) {
        ChemostatParams p;
        p.curve_x = table1_x();
        p.curve_y = table1_y();
        p.z_f = config.params.z_f;
        p.theta = panel.theta;
        p.noise = panel.noise;

        const FpControls& fc = config.fokker_planck;
        const PolygonDomain domain =
            build_domain(p, fc.x_max, fc.y_max, fc.cut_offset, fc.h, fc.h);
        const FpOperator op = apply_boundaries(assemble_operator(p, domain), domain);
        DensityField field = gaussian_initial(domain);
        FpStepper stepper(op, domain, fc.dt, fc.scheme);

        std::vector<double> snapshots =
            !fc.snapshot_times.empty() ? fc.snapshot_times
                                       : (full ? panel.snapshots_full : panel.snapshots_desk);
        std::sort(snapshots.begin(), snapshots.end());

        int k = 0;
        for (double t_snap : snapshots) {
            stepper.advance(field, t_snap);
            const std::string tag = panel.label + "-" + std::to_string(k);
            session.add("density-" + tag + ".csv", density_csv(domain, field));
            session.add("density-" + tag + ".json", density_metadata_json(domain, field, p));
            const FpDiagnostics diag = diagnostics(domain, field);
            session.add("marginal-x-" + tag + ".csv", marginal_csv(diag.marginal_x, "x"));
            session.add("marginal-y-" + tag + ".csv", marginal_csv(diag.marginal_y, "y"));
            ++k;
        }
        session.add("ledger-" + panel.label + ".csv", mass_ledger_csv(field));
    }
}

using RecipeFn = std::function<void(OutputSession&, const ExperimentConfig&, bool)>;

const std::map<std::string, RecipeFn>& recipe_table() {
    static const std::map<std::string, RecipeFn> table = {
        {"fig9",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             ChemostatParams base;
             base.curve_x = table3_x();
             base.curve_y = table3_y();
             base.z_f = full ? 15000.0 : cfg.params.z_f;
             base.theta = 1.0;
             base.noise = NoNoise{};

             SweepAxis a1{cfg.sweep.param1, cfg.sweep.values1};
             SweepAxis a2{cfg.sweep.param2, cfg.sweep.values2};
             if (a1.values.empty()) {
                 a1.param = "theta";
                 for (int i = 0; i <= 10; ++i) a1.values.push_back(0.90 + 0.02 * i);
             }
             if (a2.values.empty()) {
                 a2.param = "gamma2";
                 for (int i = 0; i <= 8; ++i) a2.values.push_back(0.05 + 0.05 * i);
             }
             SweepOptions opt;
             opt.t_end = cfg.sweep.t_end;
             s.add("sweep-0.csv", sweep_csv(survivor_sweep(base, a1, a2, opt)));
         }},
        {"fig10",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             const GeneralNoise low{0.0006, 0.0007, 9.0};
             const GeneralNoise high{0.05, 0.07, 9.0};
             run_sde_panels(s, cfg, full,
                            {{"a", 1.0, low, 6000, 6000, 3},
                             {"b", 1.0, high, 6000, 6000, 3},
                             {"c", 1.02, low, 6000, 6000, 3},
                             {"d", 1.02, high, 6000, 6000, 3},
                             {"e", 0.98, low, 6000, 6000, 3},
                             {"f", 0.98, high, 6000, 6000, 3}},
                            false);
         }},
        {"fig11",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             const GeneralNoise low{0.0006, 0.0007, 9.0};
             const GeneralNoise high{0.05, 0.07, 9.0};
             run_sde_panels(s, cfg, full,
                            {{"a", 0.99, low, 8000, 8000, 3},
                             {"b", 0.99, high, 8000, 8000, 3},
                             {"c", 1.01, low, 8000, 8000, 3},
                             {"d", 1.01, high, 8000, 8000, 3}},
                            false);
         }},
        {"fig12",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_sde_panels(s, cfg, full,
                            {{"a", 1.0, DilutionNoise{0.0006}, 220000, 22000, 10},
                             {"b", 1.0, DilutionNoise{0.001}, 80000, 9000, 10},
                             {"c", 1.02, DilutionNoise{0.0006}, 6000, 6000, 10},
                             {"d", 1.02, DilutionNoise{0.001}, 6000, 6000, 10}},
                            false);
         }},
        {"fig13",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_sde_panels(s, cfg, full,
                            {{"a", 0.98, DilutionNoise{0.0006}, 20000, 20000, 10},
                             {"b", 0.98, DilutionNoise{0.001}, 20000, 20000, 10},
                             {"c", 0.99, DilutionNoise{0.0006}, 20000, 20000, 10},
                             {"d", 0.99, DilutionNoise{0.001}, 20000, 20000, 10}},
                            false);
         }},
        {"fig15",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_fp_panels(s, cfg, full,
                           {{"a", 1.0, GeneralNoise{0.05, 0.07, 0.0}, {1, 250, 500},
                             {1, 500, 10000}},
                            {"b", 1.0, GeneralNoise{0.03, 0.03, 0.0}, {1, 250, 500},
                             {1, 2500, 7000}}});
         }},
        {"fig16",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_fp_panels(s, cfg, full,
                           {{"a", 0.99, GeneralNoise{0.5, 0.07, 0.0}, {300}, {1000}},
                            {"b", 0.99, GeneralNoise{0.03, 0.03, 0.0}, {300}, {1000}}});
         }},
        {"fig17",
         [](OutputSession& s, const ExperimentConfig& cfg, bool) {
             for (const auto& [label, sigma] : std::vector<std::pair<std::string, double>>{
                      {"a", 0.0006}, {"b", 0.0002}}) {
                 ChemostatParams p;
                 p.curve_x = table1_x();
                 p.curve_y = table1_y();
                 p.z_f = cfg.params.z_f;
                 p.theta = 1.0;
                 p.noise = DilutionNoise{sigma};

                 SimOptions opts;
                 opts.dt = cfg.run.dt;
                 opts.t_end = 50.0;
                 opts.seed = cfg.run.seed;
                 opts.output_stride = std::max<std::uint64_t>(
                     1, static_cast<std::uint64_t>(std::llround(opts.t_end / opts.dt)) / 2000);
                 const State s0 = cfg.initial.resolve(p);
                 const SdeTrajectory fullpath = simulate(p, s0, opts);

                 const ReducedTrajectory reduced = stage5_simulate_sde(
                     p, ReducedState{s0.x / p.z_f, s0.y / p.z_f}, opts.dt, opts.t_end,
                     opts.seed, 0, opts.output_stride);

                 CsvWriter w({"t", "z_full", "z_reduced"});
                 const std::size_t n = std::min(fullpath.times.size(), reduced.times.size());
                 for (std::size_t i = 0; i < n; ++i) {
                     w.add_row({fullpath.times[i], fullpath.states[i].z, reduced.zbars[i]});
                 }
                 s.add("substrate-" + label + ".csv", w.text());
             }
         }},
        {"fig18",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_fp_panels(s, cfg, full,
                           {{"a", 1.0, DilutionNoise{0.03}, {1, 250, 500}, {1, 2500, 7000}}});
         }},
        {"fig19",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_fp_panels(s, cfg, full,
                           {{"a", 0.99, DilutionNoise{0.03}, {100}, {100}},
                            {"b", 0.99, DilutionNoise{0.2}, {300}, {300}}});
         }},
        {"fig20",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_sde_panels(s, cfg, full,
                            {{"a", 1.0, GeneralNoise{0.0006, 0.0007, 9.0}, 100000, 10000, 6},
                             {"b", 1.0, GeneralNoise{0.05, 0.07, 9.0}, 100000, 10000, 6}},
                            true);
         }},
        {"fig21",
         [](OutputSession& s, const ExperimentConfig& cfg, bool full) {
             run_sde_panels(s, cfg, full,
                            {{"a", 1.0, DilutionNoise{0.0006}, 500000, 55000, 6},
                             {"b", 0.98, DilutionNoise{0.03}, 20000, 20000, 6}},
                            true);
         }},
        {"stages",
         [](OutputSession& s, const ExperimentConfig& cfg, bool) {
             ChemostatParams p = cfg.params;
             p.curve_x = table1_x();
             p.curve_y = table1_y();
             p.noise = NoNoise{};
             p.theta = 1.0;

             const std::vector<double> ladder{1e3, 1e4, 1e5};
             s.add("errors-0.csv", composite_csv(composite_vs_full(p, 1.0, 1.0, 1.0, ladder)));

             // stage trajectories at the configured z_f in full-system units
             const StagePlan plan = make_stage_plan(p, 1.0, 1.0, 1.0);
             CsvWriter w({"stage", "t", "x", "y", "z"});
             for (int i = 0; i <= 200; ++i) {
                 const double t = plan.matching.L * i / 200.0;
                 const State st = stage2_solution(p, 1.0, 1.0, 1.0, t);
                 w.add_row({"2", format_double(t), format_double(st.x), format_double(st.y),
                            format_double(st.z)});
             }
             for (int i = 0; i <= 200; ++i) {
                 const double tp = -6.0 + (plan.terminal.t0_prime + 6.0) * i / 200.0;
                 const Stage3Point q =
                     stage3_solution(p, plan.matching.mu1, plan.matching.mu2, tp);
                 w.add_row({"3", format_double(plan.matching.L + tp),
                            format_double(p.z_f * q.x), format_double(p.z_f * q.y),
                            format_double(p.z_f * q.z)});
             }
             const Stage4Result s4 = stage4_evolve(p, plan.terminal.x0_prime,
                                                   plan.terminal.y0_prime, 40.0,
                                                   std::max(10.0, 10.0 * p.curve_x.b), 0.2);
             for (std::size_t i = 0; i < s4.times.size(); ++i) {
                 // stage 4 runs on the fast clock T = z_f (t - L - t0')
                 w.add_row({"4",
                            format_double(plan.matching.L + plan.terminal.t0_prime +
                                          s4.times[i] / p.z_f),
                            format_double(p.z_f * plan.terminal.x0_prime),
                            format_double(p.z_f * plan.terminal.y0_prime),
                            format_double(s4.z_path[i])});
             }
             Stage5Options s5opt;
             s5opt.output_dt = 8.0 / 200.0;
             const ReducedTrajectory s5 = stage5_integrate(
                 p, ReducedState{plan.terminal.x0_prime, plan.terminal.y0_prime}, 8.0, s5opt);
             for (std::size_t i = 0; i < s5.times.size(); ++i) {
                 w.add_row({"5",
                            format_double(plan.matching.L + plan.terminal.t0_prime +
                                          s5.times[i]),
                            format_double(p.z_f * s5.states[i].x),
                            format_double(p.z_f * s5.states[i].y), format_double(s5.zbars[i])});
             }
             s.add("stages-0.csv", w.text());
         }},
        {"convergence",
         [](OutputSession& s, const ExperimentConfig& cfg, bool) {
             ChemostatParams p;
             p.curve_x = table1_x();
             p.curve_y = table1_y();
             p.z_f = 10.0;
             p.theta = 1.0;
             p.noise = DilutionNoise{0.5};
             const State s0{2.0, 3.0, 4.0};

             const OrderStudyResult em = strong_order_chemostat(
                 p, s0, 1.0, 1.0 / 128.0, 4, 200, SdeScheme::euler_maruyama, cfg.run.seed, 8);
             s.add("orders-0.csv", order_study_csv(em, "em-dilution-chemostat"));

             const OrderStudyResult mil = strong_order_gbm(1.5, 1.0, 1.0, 1.0, 1.0 / 32.0, 4,
                                                           200, SdeScheme::milstein,
                                                           cfg.run.seed + 1);
             s.add("orders-1.csv", order_study_csv(mil, "milstein-gbm"));

             ChemostatParams p0 = p;
             p0.noise = DilutionNoise{0.0};
             const OrderStudyResult det = strong_order_chemostat(
                 p0, s0, 1.0, 1.0 / 64.0, 4, 8, SdeScheme::euler_maruyama, cfg.run.seed);
             s.add("orders-2.csv", order_study_csv(det, "em-deterministic-limit"));
         }},
    };
    return table;
}

} // namespace

std::vector<std::string> recipe_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : recipe_table()) {
        (void)fn;
        names.push_back(name);
    }
    return names;
}

RunManifest run_recipe(const std::string& name, const ExperimentConfig& config,
                       bool full_scale) {
    const auto& table = recipe_table();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::ostringstream os;
        os << "unknown recipe '" << name << "'; available:";
        for (const auto& n : recipe_names()) os << " " << n;
        throw ConfigError(os.str());
    }

    const auto t0 = std::chrono::steady_clock::now();
    OutputSession session;
    it->second(session, config, full_scale);
    const auto t1 = std::chrono::steady_clock::now();
    const long ms =
        static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());

    const fs::path dir = fs::path(config.output_dir) / name;
    return session.commit(dir.string(), name, fnv1a64_hex(config.raw_text), ms);
}

} // namespace chemostat
