#ifndef CHEMOSTAT_GROWTH_HPP
#define CHEMOSTAT_GROWTH_HPP

namespace chemostat {

/**
 * Dimensionless Monod growth kinetics of one population,
 *
 *     rate(z) = a z / (b + z) - gamma,
 *
 * where z is the dimensionless substrate. The nondimensionalisation places
 * the break-even point of the two competing curves at z = 1 with rate 1,
 * which ties gamma to (a, b) through gamma = a/(b+1) - 1. Curves built by
 * hand may sit off that manifold (parameter sweeps do); construction only
 * warns, it does not reject.
 */
struct GrowthCurve {
    double a;     ///< maximum growth rate (> 0)
    double b;     ///< Michaelis constant (> 0)
    double gamma; ///< death rate (>= 0; 0 recovers the no-death model)

    /// Monod rate at substrate z (z >= 0 is the caller's contract).
    double rate(double z) const noexcept { return a * z / (b + z) - gamma; }

    /// d rate / dz = a b / (b + z)^2, strictly positive for all z >= 0.
    double rate_derivative(double z) const noexcept {
        const double s = b + z;
        return a * b / (s * s);
    }

    /// gamma - (a/(b+1) - 1); zero for curves produced by nondimensionalisation.
    double break_even_residual() const noexcept { return gamma - (a / (b + 1.0) - 1.0); }

    bool on_break_even_manifold(double tol = 1e-9) const noexcept;
};

/// Validating constructor: requires a > 0, b > 0, gamma >= 0, all finite.
GrowthCurve make_growth_curve(double a, double b, double gamma = 0.0);

/// Monod rate with argument checking; throws InvalidArgument for z < 0.
double growth_rate(const GrowthCurve& curve, double z);

} // namespace chemostat

#endif
