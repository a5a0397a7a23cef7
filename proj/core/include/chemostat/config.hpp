#ifndef CHEMOSTAT_CONFIG_HPP
#define CHEMOSTAT_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chemostat/fokker_planck.hpp"
#include "chemostat/params.hpp"
#include "chemostat/sde.hpp"
#include "chemostat/state.hpp"

namespace chemostat {

/// How the initial state is produced from the model parameters.
enum class InitialPolicy {
    line_canonical, ///< x = z_f/2 - 1, y = z_f/2, z = 1 (the canonical on-line start)
    line_split, ///< x = split (z_f - 1), y = (1 - split)(z_f - 1), z = 1
    state,      ///< explicit (x, y, z)
    reduced,    ///< explicit scaled (x_bar, y_bar) for stage-5 / Fokker-Planck work
};

struct InitialCondition {
    InitialPolicy policy = InitialPolicy::line_canonical;
    double split = 0.5;
    State state{};
    double x_bar = 0.5, y_bar = 0.5;

    State resolve(const ChemostatParams& params) const;
};

struct RunControls {
    double dt = 1e-3;
    double t_end = 100.0;
    int n_paths = 10;
    SdeScheme scheme = SdeScheme::euler_maruyama;
    std::uint64_t seed = 0;
    std::uint64_t output_stride = 1000;
    bool stop_when_decided = false;
};

struct FpControls {
    double h = 0.01;
    double dt = 0.05;
    double t_end = 500.0;
    FpScheme scheme = FpScheme::implicit_euler;
    double x_max = 3.0, y_max = 3.0;
    double cut_offset = 1e-2;
    std::vector<double> snapshot_times;
};

struct SweepControls {
    std::string param1 = "theta";
    std::vector<double> values1;
    std::string param2 = "gamma2";
    std::vector<double> values2;
    double t_end = 2000.0;
};

struct ExperimentConfig {
    int schema_version = 1;
    ChemostatParams params{};
    InitialCondition initial{};
    RunControls run{};
    FpControls fokker_planck{};
    SweepControls sweep{};
    std::string output_dir = "out";
    std::optional<std::string> recipe;
    std::string raw_text; ///< exact ingested text, hashed into the manifest
};

/**
 * Parse and validate a JSON experiment configuration. Unknown keys are
 * rejected with their location; module invariants (z_f > 1, non-negative
 * noise, positive steps) are enforced here so every downstream operation
 * receives a valid configuration. Throws ConfigError.
 */
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

/// A Table-1 no-noise default configuration (theta = 1, z_f = 15000).
ExperimentConfig default_config();

} // namespace chemostat

#endif
