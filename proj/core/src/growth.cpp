#include "chemostat/growth.hpp"

#include <cmath>

#include "chemostat/errors.hpp"

namespace chemostat {

bool GrowthCurve::on_break_even_manifold(double tol) const noexcept {
    return std::abs(break_even_residual()) <= tol;
}

GrowthCurve make_growth_curve(double a, double b, double gamma) {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(gamma))) {
        throw InvalidArgument("growth curve parameters must be finite");
    }
    if (a <= 0.0) throw InvalidArgument("growth curve requires a > 0");
    if (b <= 0.0) throw InvalidArgument("growth curve requires b > 0");
    if (gamma < 0.0) throw InvalidArgument("growth curve requires gamma >= 0");
    return GrowthCurve{a, b, gamma};
}

double growth_rate(const GrowthCurve& curve, double z) {
    if (!(z >= 0.0)) throw InvalidArgument("growth_rate requires substrate z >= 0");
    return curve.rate(z);
}

} // namespace chemostat
