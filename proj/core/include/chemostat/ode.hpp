#ifndef CHEMOSTAT_ODE_HPP
#define CHEMOSTAT_ODE_HPP

#include <cstddef>
#include <vector>

#include "chemostat/params.hpp"
#include "chemostat/state.hpp"

namespace chemostat {

/// Deterministic right-hand side of the dimensionless model:
/// ( x(f(z)-theta), y(g(z)-theta), theta(z_f-z) - x f(z) - y g(z) ).
State rhs(const ChemostatParams& params, const State& s);

struct OdeControls {
    double rel_tol = 1e-9;
    double abs_tol_scale = 1e-9; ///< absolute tolerance = abs_tol_scale * z_f per component
    double output_dt = 0.0;      ///< sample spacing; 0 keeps only the endpoints
    std::size_t max_steps = 200'000'000;
};

struct OdeTrajectory {
    std::vector<double> times;
    std::vector<State> states;

    const State& final_state() const { return states.back(); }
};

/**
 * Adaptive Dormand-Prince 5(4) integration of the model from s0 to t_end.
 * Components dipping into (-abs_tol, 0) are clamped to 0; deeper negativity
 * rejects the step. Throws NumericalFailure (with the failure time) on
 * step-size underflow.
 */
OdeTrajectory integrate_ode(const ChemostatParams& params, const State& s0, double t_end,
                            const OdeControls& controls = {});

/// The theta = 1 line of steady states y = z_f - x - 1 for 0 <= x <= z_f - 1.
double coexistence_line(const ChemostatParams& params, double x);

} // namespace chemostat

#endif
