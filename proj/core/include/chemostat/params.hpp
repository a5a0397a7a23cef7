#ifndef CHEMOSTAT_PARAMS_HPP
#define CHEMOSTAT_PARAMS_HPP

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "chemostat/growth.hpp"

namespace chemostat {

/// No stochastic forcing; the SDE integrators degenerate to explicit Euler.
struct NoNoise {};

/// Independent multiplicative Wiener channels on x, y and z.
struct GeneralNoise {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma3 = 0.0;
};

/// One shared Wiener process driving all three equations through the
/// dilution rate: theta = theta0 + noise.
struct DilutionNoise {
    double sigma = 0.0;
};

using NoiseSpec = std::variant<NoNoise, GeneralNoise, DilutionNoise>;

/// Number of independent Wiener channels a noise spec consumes per step.
int wiener_dimension(const NoiseSpec& noise) noexcept;

/// Full dimensionless configuration of the two-population chemostat.
struct ChemostatParams {
    double theta = 1.0;     ///< dilution rate (mean theta0 in the stochastic models)
    double z_f = 15000.0;   ///< substrate feed; must exceed 1
    GrowthCurve curve_x{};  ///< population-x kinetics
    GrowthCurve curve_y{};  ///< population-y kinetics
    NoiseSpec noise = NoNoise{};
};

/// Throws InvalidArgument on hard violations (z_f <= 1, theta <= 0,
/// negative noise intensities, bad curves).
void validate_params(const ChemostatParams& params);

/// Non-fatal diagnostics: currently flags curves off the break-even
/// manifold gamma = a/(b+1) - 1 beyond 1e-9.
std::vector<std::string> parameter_warnings(const ChemostatParams& params);

/**
 * Dimensional inputs for the two-population model. Index 0 is population x,
 * index 1 population y.
 */
struct DimensionalParams {
    std::array<double, 2> mu_max{};    ///< maximum specific growth rates [1/time]
    std::array<double, 2> half_sat{};  ///< Michaelis constants [substrate conc.]
    std::array<double, 2> death{};     ///< death rates [1/time], >= 0
    std::array<double, 2> yield{};     ///< yield coefficients [biomass/substrate]
    double feed_concentration = 0.0;   ///< s_f
    double dilution_rate = 0.0;        ///< q/V [1/time]
};

void validate_dimensional(const DimensionalParams& dim);

/// Dimensional growth rate mu_i(s) = mu_max s / (K + s) - d of population i.
double dimensional_growth(const DimensionalParams& dim, int population, double s);

/**
 * Nondimensionalise around the growth-curve crossing at substrate s_c:
 * a_i = mu_max_i / mu_c, b_i = K_i / s_c, gamma_i = d_i / mu_c,
 * z_f = s_f / s_c, theta = (q/V) / mu_c, with mu_c = mu_1(s_c).
 *
 * Requires s_c > 0, mu_1(s_c) = mu_2(s_c) to 1e-6 relative, mu_c > 0.
 * The returned curves satisfy f(1) = g(1) = 1 up to the crossing residual.
 */
ChemostatParams nondimensionalise(const DimensionalParams& dim, double s_c);

} // namespace chemostat

#endif
