#ifndef CHEMOSTAT_ASYMPTOTICS_HPP
#define CHEMOSTAT_ASYMPTOTICS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "chemostat/params.hpp"
#include "chemostat/state.hpp"

namespace chemostat {

/**
 * Large-z_f staged solution. Stage 2 grows the populations exponentially
 * while the substrate saturates at z_f; stage 3 is the order-z_f interactive
 * regime ending when the scaled substrate crosses zero at t0'; stage 4 is
 * the rapid substrate crash to Z_infinity; stage 5 evolves the order-unity
 * scaled populations under the algebraic substrate constraint
 * theta = x f(z) + y g(z).
 */

struct MatchingConstants {
    double L = 0.0;        ///< stage-3 time offset, log(z_f/M1)/(a1-theta)
    double mu1 = 0.0;      ///< stage-3 coefficient M1 e^{(a1-theta)L}/z_f (= 1 by construction)
    double mu2 = 0.0;      ///< stage-3 coefficient M2 e^{(a2-theta)L}/z_f
    double residual = 0.0; ///< L minus the M2-based value; zero only for consistent (M1, M2)
};

/// Requires a_i > theta and z_f > max(M1, M2).
MatchingConstants matching_constants(const ChemostatParams& params, double M1, double M2);

/// Stage-2 closed form (x, y, z) at time t with initial data (M1, M2, z0).
State stage2_solution(const ChemostatParams& params, double M1, double M2, double z0, double t);

struct Stage3Point {
    double x = 0.0, y = 0.0, z = 0.0; ///< primed order-unity variables
};

/// Stage-3 closed form with the matching constant C3 = 0:
/// x' = mu1 e^{(a1-theta)t'}, y' = mu2 e^{(a2-theta)t'}, z' = 1 - x' - y'.
/// z' decreases monotonically from 1 and crosses zero exactly once.
Stage3Point stage3_solution(const ChemostatParams& params, double mu1, double mu2,
                            double t_prime);

struct Stage3Terminal {
    double t0_prime = 0.0;
    double x0_prime = 0.0;
    double y0_prime = 0.0;
};

/// Root of z'(t') = 0; requires mu1, mu2 > 0. The terminal populations
/// automatically satisfy theta - x0' a1 - y0' a2 < 0 (the crash condition).
Stage3Terminal find_t0_prime(const ChemostatParams& params, double mu1, double mu2);

struct Stage4Result {
    std::vector<double> times;
    std::vector<double> z_path;
    double z_infinity_ode = 0.0;  ///< endpoint of the dZ/dT integration
    double z_infinity_root = 0.0; ///< bracketed root of x0' f(Z) + y0' g(Z) = theta
};

/// Integrate dZ/dT = theta - x0' f(Z) - y0' g(Z) downward from z_start and
/// solve the limiting constant independently. Requires the crash condition.
Stage4Result stage4_evolve(const ChemostatParams& params, double x0_prime, double y0_prime,
                           double t_span, double z_start, double output_dt = 0.0);

/// Scaled populations of stage 5 (x/z_f, y/z_f).
struct ReducedState {
    double x = 0.0;
    double y = 0.0;
};

/**
 * Algebraic substrate of the stage-5 DAE. With gamma = 0 this is the
 * positive root of
 *   (theta - x a1 - y a2) z^2 + (theta (b1+b2) - x a1 b2 - y a2 b1) z
 *     + theta b1 b2 = 0
 * solved in the cancellation-safe form; the companion root is negative and
 * discarded. With death rates the same constraint theta = x f(z) + y g(z)
 * is solved by the bracketed scalar solver. States at or below the
 * singularity line are rejected.
 */
double stage5_zbar(const ChemostatParams& params, double x_bar, double y_bar);

/// Both quadratic roots (kept, discarded) for the gamma = 0 constraint.
std::pair<double, double> stage5_zbar_roots(const ChemostatParams& params, double x_bar,
                                            double y_bar);

/// The line where the stage-5 constraint degenerates:
/// y = (theta - x (a1-gamma1)) / (a2-gamma2), i.e. theta/a2 - (a1/a2) x
/// in the no-death model.
double singularity_line(const ChemostatParams& params, double x_bar);

struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<ReducedState> states;
    std::vector<double> zbars;

    const ReducedState& final_state() const { return states.back(); }
};

struct Stage5Options {
    double output_dt = 0.0;
    double singularity_guard = 1e-2; ///< abort when y < line(x) + guard
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
};

/// Integrate the stage-5 DAE (z recomputed from the constraint at every
/// evaluation). Requires x a1 + y a2 > theta at the initial state; aborts
/// with the position when a trajectory reaches the singularity guard.
ReducedTrajectory stage5_integrate(const ChemostatParams& params, const ReducedState& r0,
                                   double t_end, const Stage5Options& options = {});

/// Stage-5 Langevin path (Euler-Maruyama) with the same noise structures as
/// the full system and no noise on the algebraic substrate equation.
ReducedTrajectory stage5_simulate_sde(const ChemostatParams& params, const ReducedState& r0,
                                      double dt, double t_end, std::uint64_t seed,
                                      std::uint64_t path_index = 0,
                                      std::uint64_t output_stride = 1);

/// Everything needed to glue the five stages together.
struct StagePlan {
    double M1 = 0.0, M2 = 0.0, z0 = 0.0;
    MatchingConstants matching{};
    Stage3Terminal terminal{};
    double z_infinity = 0.0;
};

StagePlan make_stage_plan(const ChemostatParams& params, double M1, double M2, double z0 = 1.0);

struct CompositeRow {
    double z_f = 0.0;
    double slope_x = 0.0, slope_y = 0.0;   ///< stage-2 exponents fitted from the full ODE
    double slope_x_target = 0.0, slope_y_target = 0.0;
    double substrate_min_full = 0.0, substrate_min_composite = 0.0;
    double substrate_min_rel_err = 0.0;
    double endpoint_distance = 0.0; ///< |(x,y)/z_f - stage-5 endpoint| at the matched time
};

/// Run the full ODE against the staged composite over a z_f ladder.
std::vector<CompositeRow> composite_vs_full(const ChemostatParams& params_template, double M1,
                                            double M2, double z0,
                                            const std::vector<double>& zf_ladder,
                                            double t_bar_end = 8.0);

} // namespace chemostat

#endif
