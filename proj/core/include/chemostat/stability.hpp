#ifndef CHEMOSTAT_STABILITY_HPP
#define CHEMOSTAT_STABILITY_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "chemostat/params.hpp"
#include "chemostat/state.hpp"

namespace chemostat {

/**
 * Closed-form linear stability of the reduced two-equation system obtained
 * by replacing the substrate equation with z = z_f - x - y (the long-time
 * invariant plane). All eigenvalues are real; each steady state has two.
 */

/// Washout x = y = 0: returns ( g(z_f) - theta , f(z_f) - theta ) in the
/// death-rate generalised form. Stable iff both growth rates at the feed
/// level lie below theta.
std::pair<double, double> eigenvalues_washout(const ChemostatParams& params);

enum class Survivor { population_x, population_y };

/// Single-survivor steady state (the other population extinct, survivor's
/// growth pinned at theta). Throws InvalidArgument when no substrate level
/// solves the break-even (theta + gamma >= a).
std::pair<double, double> eigenvalues_single_survivor(const ChemostatParams& params,
                                                      Survivor which);

/// Substrate level z* with rate(z*) = theta for the given curve.
double break_even_substrate(const GrowthCurve& curve, double theta);

/**
 * Coexistence line (exists only at theta = 1): eigenvalues at the line
 * point parametrised by `a_pos`, the population-y coordinate, i.e. the
 * steady state (x, y) = (z_f - 1 - a_pos, a_pos). Returns lambda1 =
 * -(z_f - 1 - a_pos) f'(1) - a_pos g'(1) < 0; the second eigenvalue is
 * identically zero along the line. Throws unless |theta - 1| <= 1e-9 and
 * 0 < a_pos < z_f - 1.
 */
double eigenvalue_coexistence_line(const ChemostatParams& params, double a_pos);

struct SteadyStateReport {
    std::string name;
    std::array<double, 2> eigenvalues{};
    bool exists = true;
    bool line = false; ///< second eigenvalue identically zero along a line
    std::string verdict;
    std::vector<std::string> conditions;
};

struct StabilityReport {
    std::vector<SteadyStateReport> states;
};

/// Evaluate all four steady states of the reduced system.
StabilityReport stability_report(const ChemostatParams& params);

} // namespace chemostat

#endif
