#ifndef CHEMOSTAT_SWEEP_HPP
#define CHEMOSTAT_SWEEP_HPP

#include <string>
#include <vector>

#include "chemostat/ode.hpp"
#include "chemostat/params.hpp"

namespace chemostat {

enum class SweepLabel {
    x_survives,
    y_survives,
    both_washout,
    coexist_at_line,
    undecided,
    numerical_failure,
};

std::string to_string(SweepLabel label);

/// One sweep axis: a model parameter name and the grid values it takes.
/// Supported names: theta, z_f, a1, b1, gamma1, a2, b2, gamma2.
struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

struct SweepCell {
    double value1 = 0.0;
    double value2 = 0.0;
    SweepLabel label = SweepLabel::undecided;
    State final_state{};
    std::string note; ///< failure diagnostics, empty otherwise
};

struct SweepOptions {
    double t_end = 2000.0;
    double extinction_threshold_rel = 1e-6; ///< extinct below this fraction of z_f
    double theta_one_tol = 1e-9;            ///< |theta-1| tolerance for the line case
    OdeControls controls{};
    int n_threads = 0; ///< 0: hardware concurrency
};

struct SweepResult {
    SweepAxis axis1, axis2;
    std::vector<SweepCell> cells; ///< row-major over (axis1, axis2)
};

/**
 * Integrate the deterministic model over a 2-axis parameter grid and label
 * the survivor per cell. Initial condition: equal populations on the
 * coexistence line, x = y = (z_f - 1)/2, z = 1. A population is extinct
 * when it sits below the threshold with non-positive drift; "coexist" is
 * reported only where theta = 1 within tolerance. Cells whose integration
 * fails are labelled numerical_failure with the diagnostic attached.
 */
SweepResult survivor_sweep(const ChemostatParams& base, const SweepAxis& axis1,
                           const SweepAxis& axis2, const SweepOptions& options = {});

} // namespace chemostat

#endif
