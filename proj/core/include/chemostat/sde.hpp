#ifndef CHEMOSTAT_SDE_HPP
#define CHEMOSTAT_SDE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chemostat/params.hpp"
#include "chemostat/state.hpp"

namespace chemostat {

enum class SdeScheme { euler_maruyama, milstein };

std::string to_string(SdeScheme scheme);

/// Drift vector and per-Wiener diffusion columns at a state.
/// GeneralNoise: three diagonal columns (s1 x, 0, 0), (0, s2 y, 0), (0, 0, s3 z).
/// DilutionNoise: one shared column (-s x, -s y, s (z_f - z)).
struct DriftDiffusion {
    State drift{};
    std::array<State, 3> columns{};
    int n_wieners = 0;
};

DriftDiffusion drift_diffusion(const ChemostatParams& params, const State& s);

/// One Euler-Maruyama step; dW must carry wiener_dimension(params.noise)
/// increments. No clamping here; the negativity policy lives in simulate().
State step_euler_maruyama(const ChemostatParams& params, const State& s, double dt,
                          std::span<const double> dW);

/// Milstein step: Euler-Maruyama plus the (b . grad) b (dW^2 - dt)/2
/// correction. Both noise structures need only dW^2 terms: the general
/// noise is diagonal and the dilution noise has a single driving Wiener,
/// so no Levy areas arise.
State step_milstein(const ChemostatParams& params, const State& s, double dt,
                    std::span<const double> dW);

struct ExtinctionEvent {
    int population; ///< 0 = x, 1 = y
    double time;    ///< first crossing below the extinction threshold
};

struct SdeTrajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<ExtinctionEvent> events;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    SdeScheme scheme = SdeScheme::euler_maruyama;
    double dt = 0.0;
    std::uint64_t n_steps = 0; ///< steps actually taken
    long clamp_count = 0;      ///< components pushed below 0 and reset
    bool completed = false;
    std::string failure; ///< diagnostic when completed == false

    const State& final_state() const { return states.back(); }
};

struct SimOptions {
    double dt = 1e-3;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    SdeScheme scheme = SdeScheme::euler_maruyama;
    std::uint64_t path_index = 0;
    std::uint64_t output_stride = 1;         ///< record every k-th step
    double extinction_threshold_rel = 1e-6;  ///< threshold = rel * z_f
    bool stop_when_decided = false;          ///< stop once exactly one population is extinct
};

/**
 * Fixed-step simulation. Wiener increments are Normal(0, dt) drawn from the
 * counter generator at (seed, path_index, step, channel), so identical
 * options reproduce bit-identical paths. Components driven below zero are
 * clamped to 0 (counted); a non-finite state aborts with NumericalFailure
 * carrying the step index and state.
 */
SdeTrajectory simulate(const ChemostatParams& params, const State& s0, const SimOptions& opts);

struct EnsembleSummaryRow {
    double t = 0.0;
    std::array<double, 3> mean{}, q05{}, q95{}; ///< x, y, z order
};

struct SurvivorTally {
    int x_wins = 0;
    int y_wins = 0;
    int both_extinct = 0;
    int undecided = 0;
    int failed = 0;

    int total() const { return x_wins + y_wins + both_extinct + undecided + failed; }
};

struct Ensemble {
    std::vector<SdeTrajectory> trajectories;
    std::vector<EnsembleSummaryRow> summary; ///< over the common completed grid
    SurvivorTally tally;
};

/// n independent paths (path_index 0..n-1); per-path failures are recorded
/// in the trajectory and the tally, never fatal. Paths run concurrently.
Ensemble simulate_ensemble(const ChemostatParams& params, const State& s0,
                           const SimOptions& opts, int n_paths, int n_threads = 0);

/**
 * Replay of the exact discrete deficit identity for dilution-noise
 * Euler-Maruyama paths: w_{n+1} = w_n (1 - theta0 dt - sigma dW_n) with
 * w = z_f - (x+y+z). Returns the maximum |replayed - observed| over the
 * trajectory's recorded samples. Rejects general-noise or Milstein paths.
 */
double deficit_diagnostic(const SdeTrajectory& traj, const ChemostatParams& params);

struct OrderStudyResult {
    std::vector<double> dts;
    std::vector<double> errors; ///< mean |X_dt(T) - X_ref(T)| per level
    double slope = 0.0;         ///< least-squares slope in log-log
};

/**
 * Strong-convergence study on the chemostat SDE with coupled refinement:
 * all levels consume sums of the same fine-grid increments, and the
 * reference is the same scheme at dt0 / 2^(levels-1) / ref_refine.
 * Levels halve from dt0; at least 3 are required.
 */
OrderStudyResult strong_order_chemostat(const ChemostatParams& params, const State& s0,
                                        double t_end, double dt0, int levels, int n_paths,
                                        SdeScheme scheme, std::uint64_t seed,
                                        int ref_refine = 4);

/// Same study on the single-channel geometric Brownian motion
/// dX = drift X dt + vol X dW, measured against the exact endpoint
/// X0 exp((drift - vol^2/2) T + vol W_T) on the shared Brownian path.
OrderStudyResult strong_order_gbm(double drift, double vol, double x0, double t_end,
                                  double dt0, int levels, int n_paths, SdeScheme scheme,
                                  std::uint64_t seed);

} // namespace chemostat

#endif
